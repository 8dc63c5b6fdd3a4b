use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{
    descent_direction, design_gain, discrete_linearization, eval_cost, line_search, CostSpec, DescentDirection,
    DescentMode, GainWeights, LineSearchParams,
};
use crate::dynamics::ControlSystem;
use crate::integrate::{linearize, JacobianMethod, Trajectory};
use crate::{Error, Result};

/// Cooperative cancellation, polled once per iteration.
pub trait Interrupt {
    fn interrupted(&self) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoInterrupt;

impl Interrupt for NoInterrupt {
    fn interrupted(&self) -> bool {
        false
    }
}

impl<F: Fn() -> bool> Interrupt for F {
    fn interrupted(&self) -> bool {
        self()
    }
}

/// What `grad_tol` is relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradScale {
    /// `max(1, |Dg . zeta_0|)`.
    #[default]
    Initial,
    /// `1 + g(xi)`. Used for warm-started solves that must take at least one
    /// step even when the initial directional derivative is tiny.
    Cost,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProntoOptions {
    /// Projection gain weights, multiples of the identity.
    pub gain_q: f64,
    pub gain_r: f64,
    pub gain_q_final: f64,
    pub mode: DescentMode,
    /// Stop once `|Dg . zeta| < grad_tol * scale`.
    pub grad_tol: f64,
    pub grad_scale: GradScale,
    pub max_iterations: usize,
    pub line_search: LineSearchParams,
    /// Projection fails once `|x|_inf` exceeds this.
    pub divergence_bound: f64,
}

impl Default for ProntoOptions {
    fn default() -> Self {
        Self {
            gain_q: 1.0,
            gain_r: 1.0,
            gain_q_final: 10.0,
            mode: DescentMode::Newton,
            grad_tol: 1e-4,
            grad_scale: GradScale::Initial,
            max_iterations: 50,
            line_search: LineSearchParams::default(),
            divergence_bound: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    /// `|Dg . zeta|` at the start of the iteration.
    pub gradient: f64,
    /// Accepted step, 0 on the converged iteration.
    pub gamma: f64,
    pub mode: DescentMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    /// The line search failed with the directional derivative already at
    /// rounding level relative to the cost.
    NoiseFloor,
}

#[derive(Debug, Clone)]
pub struct ProntoSolution {
    pub trajectory: Trajectory,
    pub cost: f64,
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
}

impl ProntoSolution {
    pub fn iterations(&self) -> usize {
        self.records.iter().filter(|r| r.gamma > 0.0).count()
    }

    pub fn gradient(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.gradient)
    }
}

/// Solver failure with the last feasible iterate.
#[derive(Debug, Clone)]
pub struct ProntoFailure {
    pub error: Error,
    pub trajectory: Trajectory,
    pub cost: f64,
    pub records: Vec<IterationRecord>,
}

impl core::fmt::Display for ProntoFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} (after {} iterations, cost {:e})", self.error, self.records.len(), self.cost)
    }
}

impl From<Box<ProntoFailure>> for Error {
    fn from(f: Box<ProntoFailure>) -> Self {
        f.error
    }
}

fn newton_or_fallback<S: ControlSystem + ?Sized>(
    sys: &S,
    spec: &CostSpec,
    traj: &Trajectory,
    lin: &super::Linearization,
    gain: &super::FeedbackGain,
    mode: DescentMode,
) -> Result<DescentDirection> {
    if mode == DescentMode::Newton {
        match descent_direction(sys, spec, traj, lin, gain, DescentMode::Newton) {
            Ok(d) if d.slope < 0.0 && d.model_change < 0.0 => return Ok(d),
            Ok(d) if d.slope == 0.0 => return Ok(d),
            Ok(_) | Err(Error::IndefiniteHessian { .. } | Error::RiccatiBlowup { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    descent_direction(sys, spec, traj, lin, gain, DescentMode::GaussNewton)
}

/// Minimizes `spec` over trajectories of `sys` starting from `xi0`, whose
/// initial state is kept fixed. Every iterate is a trajectory, and the cost
/// decreases monotonically.
pub fn pronto_solve<S: ControlSystem + ?Sized>(
    sys: &S,
    spec: &CostSpec,
    xi0: &Trajectory,
    opts: &ProntoOptions,
    interrupt: &dyn Interrupt,
) -> core::result::Result<ProntoSolution, Box<ProntoFailure>> {
    let mut traj = xi0.clone();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut cost = f64::NAN;
    macro_rules! fail {
        ($e:expr) => {
            return Err(Box::new(ProntoFailure {
                error: $e,
                trajectory: traj,
                cost,
                records,
            }))
        };
    }
    macro_rules! tryf {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(e) => fail!(e),
            }
        };
    }

    // Pointwise Legendre-Clebsch condition of the integrand.
    if spec.input_weight().clone().cholesky().is_none() {
        fail!(Error::InvalidParameter("input weight is not positive definite".into()));
    }
    cost = tryf!(eval_cost(spec, &traj));
    let x0 = traj.initial_state().clone();
    let weights = GainWeights::scaled(
        traj.state_dim(),
        traj.input_dim(),
        opts.gain_q,
        opts.gain_r,
        opts.gain_q_final,
    );
    let mut scale = 1.0_f64;
    for it in 0..opts.max_iterations {
        if interrupt.interrupted() {
            fail!(Error::Interrupted);
        }
        let cont = tryf!(linearize(sys, &traj, JacobianMethod::Model));
        let gain = tryf!(design_gain(&cont, &traj.grid, &weights));
        let lin = tryf!(discrete_linearization(sys, &traj));
        let dir = tryf!(newton_or_fallback(sys, spec, &traj, &lin, &gain, opts.mode));
        let g = dir.slope.abs();
        match opts.grad_scale {
            GradScale::Initial if it == 0 => scale = g.max(1.0),
            GradScale::Initial => {}
            GradScale::Cost => scale = 1.0 + cost.abs(),
        }
        if g < opts.grad_tol * scale || dir.slope >= 0.0 {
            records.push(IterationRecord {
                iteration: it,
                cost,
                gradient: g,
                gamma: 0.0,
                mode: dir.mode,
            });
            return Ok(ProntoSolution {
                trajectory: traj,
                cost,
                records,
                status: SolveStatus::Converged,
            });
        }
        let step = match line_search(
            sys,
            spec,
            &x0,
            &traj,
            cost,
            &dir,
            &gain,
            &opts.line_search,
            opts.divergence_bound,
        ) {
            Ok(s) => s,
            Err(Error::LineSearchFailure { .. }) if g <= 1e-10 * (1.0 + cost.abs()) => {
                records.push(IterationRecord {
                    iteration: it,
                    cost,
                    gradient: g,
                    gamma: 0.0,
                    mode: dir.mode,
                });
                return Ok(ProntoSolution {
                    trajectory: traj,
                    cost,
                    records,
                    status: SolveStatus::NoiseFloor,
                });
            }
            Err(e) => fail!(e),
        };
        records.push(IterationRecord {
            iteration: it,
            cost,
            gradient: g,
            gamma: step.gamma,
            mode: dir.mode,
        });
        traj = step.trajectory;
        cost = step.cost;
    }
    fail!(Error::MaxIterations {
        iterations: opts.max_iterations
    })
}
