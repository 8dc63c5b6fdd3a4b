//! Periodic orbit design in three steps.
//!
//! 1. A desired state curve `x_d` joins `x0` to `x_f = Delta^-1(x0)` on
//!    `[0, T]`; inverse dynamics of the fully actuated embedding gives its
//!    input `u_d^e` ([`prepare_desired`]).
//! 2. The embedding cost is minimized while the penalty `rho_emb` on the
//!    embedding input grows, until that input is negligible
//!    ([`step2_embedding_continuation`]).
//! 3. On the underactuated system the terminal state is driven to `x_f` by
//!    increasing the terminal penalty and then by Newton steps on the target
//!    state ([`step3_enforce_final_state`]).
//!
//! [`verify_periodic_orbit`] checks the result.

mod desired;
mod strategy;
mod verify;

pub use desired::{build_desired_curve, desired_embedding_input, DesiredCurve, ViaPoint};
pub use strategy::{
    compute_boundary_states, dbeta, embedding_input_norm, prepare_desired, project_curve,
    step2_embedding_continuation, step3_enforce_final_state, ContinuationSchedule, Desired, DesiredInput,
    DesignProblem, EmbeddingOptimum, Hooks, Phase, StrategyFailure, StrategyOptions, StrategyTrace,
    TerminalOptimum, TraceRecord,
};
pub use verify::{verify_periodic_orbit, Check, VerificationReport, VerifyTolerances};

use alloc::boxed::Box;

use crate::dynamics::HybridSystem;

/// Everything the strategy produces.
#[derive(Debug, Clone)]
pub struct DesignOutcome {
    pub desired: Desired,
    pub embedding: EmbeddingOptimum,
    pub terminal: TerminalOptimum,
    pub trace: StrategyTrace,
    pub report: VerificationReport,
}

/// Runs steps 1 to 3 and verifies the result.
pub fn design_orbit<S: HybridSystem + ?Sized>(
    sys: &S,
    prob: &DesignProblem,
    opts: &StrategyOptions,
    verify: &VerifyTolerances,
    hooks: &mut Hooks<'_>,
) -> core::result::Result<DesignOutcome, Box<StrategyFailure>> {
    let mut trace = StrategyTrace::default();
    let fail = |e, trace: &StrategyTrace| {
        Box::new(StrategyFailure {
            error: e,
            trace: trace.clone(),
            last: None,
        })
    };
    opts.validate().map_err(|e| fail(e, &trace))?;
    let desired = prepare_desired(sys, prob).map_err(|e| fail(e, &trace))?;
    let embedding = step2_embedding_continuation(sys, prob, &desired, opts, &mut trace, hooks)?;
    let terminal = step3_enforce_final_state(sys, prob, &desired, &embedding.trajectory, opts, &mut trace, hooks)?;
    let report = verify_periodic_orbit(sys, &prob.x0, &prob.xf, &terminal.trajectory, &prob.scaling, verify)
        .map_err(|e| fail(e, &trace))?;
    Ok(DesignOutcome {
        desired,
        embedding,
        terminal,
        trace,
        report,
    })
}
