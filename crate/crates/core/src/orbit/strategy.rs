use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::desired::{build_desired_curve, desired_embedding_input, DesiredCurve, ViaPoint};
use crate::dynamics::{ControlSystem, Embedded, HybridSystem, Underactuated};
use crate::integrate::{linearize, Curve, JacobianMethod, TimeGrid, Trajectory};
use crate::linalg;
use crate::pronto::{
    design_gain, project, pronto_solve, CostSpec, GainWeights, GradScale, Interrupt, ProntoOptions, ProntoSolution,
    SolveStatus,
};
use crate::scaling::StateScaling;
use crate::{Error, Matrix, Result, Vector};

/// Penalty continuation `rho_{i+1} = factor * rho_i` from `rho0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ContinuationSchedule {
    pub rho0: f64,
    pub factor: f64,
    pub max_steps: usize,
}

impl ContinuationSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.rho0.is_finite() && self.factor > 1.0 && self.factor.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "continuation needs rho0 > 0 and factor > 1 (got {}, {})",
                self.rho0,
                self.factor
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("continuation needs max_steps >= 1".into()));
        }
        Ok(())
    }
}

/// Desired input of the underactuated system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesiredInput {
    /// The actuated part `u_0` of the embedding inverse dynamics.
    InverseDynamics,
    Zero,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StrategyOptions {
    pub rho_emb: ContinuationSchedule,
    /// Schedule of the terminal penalty; `max_steps` bounds the number of
    /// outer iterations of the terminal-state step.
    pub rho_f: ContinuationSchedule,
    /// Exit threshold on `|u_emb|_L2`.
    pub eps_emb: f64,
    /// Terminal error (normalized, inf-norm) below which Newton updates of
    /// the target replace penalty increases.
    pub delta_f_tol: f64,
    /// Terminal error accepted as periodic.
    pub eps_f_tol: f64,
    /// Cost-relative gradient tolerance of the terminal-state solves.
    pub terminal_grad_tol: f64,
    /// Finite-difference step of the target sensitivity, normalized units.
    pub dbeta_step: f64,
    pub max_dbeta_cond: f64,
    /// Halvings of a target update that fails to reduce the terminal error.
    pub max_target_halvings: usize,
    pub pronto: ProntoOptions,
}

impl Default for StrategyOptions {
    fn default() -> Self {
        Self {
            rho_emb: ContinuationSchedule {
                rho0: 1.0,
                factor: 2.0,
                max_steps: 20,
            },
            rho_f: ContinuationSchedule {
                rho0: 1.0,
                factor: 2.0,
                max_steps: 30,
            },
            eps_emb: 1e-2,
            delta_f_tol: 5e-2,
            eps_f_tol: 1e-3,
            terminal_grad_tol: 1e-18,
            dbeta_step: 1e-4,
            max_dbeta_cond: 1e10,
            max_target_halvings: 8,
            pronto: ProntoOptions::default(),
        }
    }
}

impl StrategyOptions {
    pub fn validate(&self) -> Result<()> {
        self.rho_emb.validate()?;
        self.rho_f.validate()?;
        let positive = [
            ("eps_emb", self.eps_emb),
            ("delta_f_tol", self.delta_f_tol),
            ("eps_f_tol", self.eps_f_tol),
            ("terminal_grad_tol", self.terminal_grad_tol),
            ("dbeta_step", self.dbeta_step),
            ("max_dbeta_cond", self.max_dbeta_cond),
            ("grad_tol", self.pronto.grad_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(alloc::format!("{name} must be positive (got {v})")));
            }
        }
        if self.eps_f_tol > self.delta_f_tol {
            return Err(Error::InvalidParameter("eps_f_tol must not exceed delta_f_tol".into()));
        }
        Ok(())
    }
}

/// Boundary data and weights of one orbit design.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub x0: Vector,
    /// `Delta^-1(x0)`.
    pub xf: Vector,
    pub grid: TimeGrid,
    pub q: Matrix,
    pub r: Matrix,
    pub desired_input: DesiredInput,
    pub via_points: Vec<ViaPoint>,
    pub scaling: StateScaling,
}

/// `(x0, Delta^-1(x0))`.
pub fn compute_boundary_states<S: HybridSystem + ?Sized>(sys: &S, x0: &Vector) -> Result<(Vector, Vector)> {
    let xf = sys.inverse_jump(x0)?;
    if !linalg::all_finite(&xf) {
        return Err(Error::InverseJumpFailed);
    }
    Ok((x0.clone(), xf))
}

impl DesignProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new<S: HybridSystem + ?Sized>(
        sys: &S,
        x0: Vector,
        grid: TimeGrid,
        q: Matrix,
        r: Matrix,
        desired_input: DesiredInput,
        via_points: Vec<ViaPoint>,
        scaling: StateScaling,
    ) -> Result<Self> {
        let n = 2 * sys.dof();
        if x0.len() != n {
            return Err(Error::Dimension {
                what: "initial state",
                expected: n,
                found: x0.len(),
            });
        }
        if scaling.dim() != n {
            return Err(Error::Dimension {
                what: "state scaling",
                expected: n,
                found: scaling.dim(),
            });
        }
        if r.nrows() != sys.n_act() {
            return Err(Error::Dimension {
                what: "input weight R",
                expected: sys.n_act(),
                found: r.nrows(),
            });
        }
        let (x0, xf) = compute_boundary_states(sys, &x0)?;
        Ok(Self {
            x0,
            xf,
            grid,
            q,
            r,
            desired_input,
            via_points,
            scaling,
        })
    }

    /// Embedding cost weights `blkdiag(R, ...)` need the actuated block only;
    /// the embedding block is `rho_emb^2 I`.
    fn embedding_spec(&self, desired: &Curve, n_emb: usize, rho_emb: f64, rho_f: f64) -> Result<CostSpec> {
        CostSpec::new(
            self.q.clone(),
            self.r.clone(),
            rho_emb,
            n_emb,
            rho_f,
            self.xf.clone(),
            desired.clone(),
        )
    }
}

/// Desired curve `x_d`, embedding inverse dynamics `u_d^e` and the
/// underactuated desired input `u_d`.
#[derive(Debug, Clone)]
pub struct Desired {
    pub curve: DesiredCurve,
    pub embedding_input: Vec<Vector>,
    pub input: Vec<Vector>,
}

impl Desired {
    /// `(x_d, u_d^e)`, a trajectory of the embedding up to discretization.
    pub fn embedding_curve(&self) -> Result<Curve> {
        self.curve.with_inputs(self.embedding_input.clone())
    }

    /// `(x_d, [u_d; 0])`, the target of the embedding continuation.
    pub fn embedding_target(&self, n_emb: usize) -> Result<Curve> {
        self.curve
            .with_inputs(self.input.iter().map(|u| linalg::vstack(u, &Vector::zeros(n_emb))).collect())
    }

    /// `(x_d, u_d)`.
    pub fn target(&self) -> Result<Curve> {
        self.curve.with_inputs(self.input.clone())
    }
}

/// Step 1: desired curve through the boundary states and its inputs.
pub fn prepare_desired<S: HybridSystem + ?Sized>(sys: &S, prob: &DesignProblem) -> Result<Desired> {
    let curve = build_desired_curve(&prob.grid, sys.dof(), &prob.x0, &prob.xf, &prob.via_points)?;
    let embedding_input = desired_embedding_input(sys, &curve)?;
    let m = sys.n_act();
    let input = match prob.desired_input {
        DesiredInput::InverseDynamics => embedding_input.iter().map(|u| u.rows(0, m).into_owned()).collect(),
        DesiredInput::Zero => alloc::vec![Vector::zeros(m); prob.grid.nodes()],
    };
    Ok(Desired {
        curve,
        embedding_input,
        input,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Embedding continuation on `rho_emb`.
    Embedding,
    /// Terminal error above `delta_f_tol`: `rho_f` is increased.
    RhoF,
    /// Terminal error within `delta_f_tol`: Newton update of the target.
    TargetNewton,
    /// Trial target rejected for insufficient decrease of the terminal
    /// error; the update is halved from the last accepted iterate.
    TargetBacktrack,
}

/// One outer iteration of the strategy.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub phase: Phase,
    /// The iteration met its exit test; no update followed.
    pub accepted: bool,
    pub rho_emb: Option<f64>,
    pub rho_f: f64,
    pub u_emb_norm: Option<f64>,
    /// `|x(T) - x_f|_inf`, normalized.
    pub terminal_error: f64,
    /// Target state used by the solve.
    pub x_target: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub gradient: f64,
    pub status: SolveStatus,
    pub dbeta_cond: Option<f64>,
}

/// Append-only record of the outer iterations.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StrategyTrace {
    pub records: Vec<TraceRecord>,
}

impl StrategyTrace {
    /// Violations of the terminal-step branch rule: the target changes only
    /// from iterates with terminal error `<= delta_f_tol`, and `rho_f` never
    /// decreases. Rejected trial targets are not iterates; the target that
    /// follows them is measured against the last accepted iterate.
    pub fn branch_violations(&self, delta_f_tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let mut base: Option<&TraceRecord> = None;
        let mut prev_rho = f64::NEG_INFINITY;
        for r in self.records.iter().filter(|r| r.phase != Phase::Embedding) {
            if r.rho_f < prev_rho {
                out.push(alloc::format!("rho_f decreased at step {}", r.step));
            }
            prev_rho = r.rho_f;
            if let Some(a) = base {
                if a.x_target != r.x_target && a.terminal_error > delta_f_tol {
                    out.push(alloc::format!(
                        "target moved after step {} with terminal error {:e} > {:e}",
                        a.step,
                        a.terminal_error,
                        delta_f_tol
                    ));
                }
            }
            if r.phase != Phase::TargetBacktrack {
                base = Some(r);
            }
        }
        out
    }
}

/// Cancellation and trace streaming.
pub struct Hooks<'a> {
    pub interrupt: &'a dyn Interrupt,
    pub observer: &'a mut dyn FnMut(&TraceRecord),
}

impl core::fmt::Debug for Hooks<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("Hooks")
    }
}

/// Strategy failure with the trace so far and the best trajectory at hand.
#[derive(Debug, Clone)]
pub struct StrategyFailure {
    pub error: Error,
    pub trace: StrategyTrace,
    pub last: Option<Trajectory>,
}

impl core::fmt::Display for StrategyFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} (after {} outer iterations)", self.error, self.trace.records.len())
    }
}

type StrategyResult<T> = core::result::Result<T, Box<StrategyFailure>>;

fn failure(error: Error, trace: &StrategyTrace, last: Option<&Trajectory>) -> Box<StrategyFailure> {
    Box::new(StrategyFailure {
        error,
        trace: trace.clone(),
        last: last.cloned(),
    })
}

/// `sqrt(int |u_emb|^2 dt)` by the trapezoidal rule.
pub fn embedding_input_norm(curve: &Curve, n_act: usize) -> f64 {
    let w = curve.grid.trapezoid_weights();
    let s: f64 = curve
        .inputs
        .iter()
        .zip(&w)
        .map(|(u, w)| w * u.rows(n_act, u.len() - n_act).norm_squared())
        .sum();
    libm::sqrt(s)
}

/// Projects an arbitrary curve with a gain designed along the curve itself.
pub fn project_curve<S: ControlSystem + ?Sized>(
    sys: &S,
    x0: &Vector,
    curve: &Curve,
    opts: &ProntoOptions,
) -> Result<Trajectory> {
    let lin = linearize(sys, curve, JacobianMethod::Model)?;
    let w = GainWeights::scaled(
        sys.state_dim(),
        sys.input_dim(),
        opts.gain_q,
        opts.gain_r,
        opts.gain_q_final,
    );
    let gain = design_gain(&lin, &curve.grid, &w)?;
    project(sys, x0, curve, &gain, opts.divergence_bound)
}

fn record_of(sol: &ProntoSolution) -> (f64, usize, f64, SolveStatus) {
    (sol.cost, sol.iterations(), sol.gradient(), sol.status)
}

/// Result of the embedding continuation.
#[derive(Debug, Clone)]
pub struct EmbeddingOptimum {
    /// Trajectory of the embedded system, inputs `[u; u_emb]`.
    pub trajectory: Trajectory,
    pub rho_emb: f64,
    pub u_emb_norm: f64,
    pub cost: f64,
}

/// Step 2: minimize the embedding cost, doubling `rho_emb` until
/// `|u_emb|_L2 < eps_emb`. Starts from the projection of `(x_d, u_d^e)`.
pub fn step2_embedding_continuation<S: HybridSystem + ?Sized>(
    sys: &S,
    prob: &DesignProblem,
    desired: &Desired,
    opts: &StrategyOptions,
    trace: &mut StrategyTrace,
    hooks: &mut Hooks<'_>,
) -> StrategyResult<EmbeddingOptimum> {
    let emb = Embedded(sys);
    let m = sys.n_act();
    let n_emb = sys.n_emb();
    let start = desired
        .embedding_curve()
        .and_then(|c| project_curve(&emb, &prob.x0, &c, &opts.pronto))
        .map_err(|e| failure(e, trace, None))?;
    let target = desired.embedding_target(n_emb).map_err(|e| failure(e, trace, None))?;
    let rho_f = opts.rho_f.rho0;
    let mut rho = opts.rho_emb.rho0;
    let mut warm = start;
    for _ in 0..opts.rho_emb.max_steps {
        let spec = prob
            .embedding_spec(&target, n_emb, if n_emb == 0 { 0.0 } else { rho }, rho_f)
            .map_err(|e| failure(e, trace, Some(&warm)))?;
        let sol = match pronto_solve(&emb, &spec, &warm, &opts.pronto, hooks.interrupt) {
            Ok(s) => s,
            Err(f) => return Err(failure(f.error, trace, Some(&f.trajectory))),
        };
        let norm = embedding_input_norm(&sol.trajectory, m);
        let err = prob.scaling.inf_norm(&(sol.trajectory.final_state() - &prob.xf));
        let (cost, iterations, gradient, status) = record_of(&sol);
        let accepted = norm < opts.eps_emb;
        let rec = TraceRecord {
            step: trace.records.len(),
            phase: Phase::Embedding,
            accepted,
            rho_emb: Some(rho),
            rho_f,
            u_emb_norm: Some(norm),
            terminal_error: err,
            x_target: prob.xf.iter().copied().collect(),
            cost,
            iterations,
            gradient,
            status,
            dbeta_cond: None,
        };
        (hooks.observer)(&rec);
        trace.records.push(rec);
        if accepted {
            return Ok(EmbeddingOptimum {
                trajectory: sol.trajectory,
                rho_emb: rho,
                u_emb_norm: norm,
                cost,
            });
        }
        rho *= opts.rho_emb.factor;
        warm = sol.trajectory;
    }
    let residual = trace.records.last().and_then(|r| r.u_emb_norm).unwrap_or(f64::NAN);
    Err(failure(
        Error::ContinuationStall {
            steps: opts.rho_emb.max_steps,
            residual,
        },
        trace,
        Some(&warm),
    ))
}

/// Result of the terminal-state step.
#[derive(Debug, Clone)]
pub struct TerminalOptimum {
    pub trajectory: Trajectory,
    pub x_target: Vector,
    pub rho_f: f64,
    pub terminal_error: f64,
    /// Optimum of every outer iteration, in order.
    pub iterates: Vec<Trajectory>,
    /// Last target sensitivity, if a Newton update was taken.
    pub dbeta: Option<Matrix>,
}

fn terminal_options(opts: &StrategyOptions) -> ProntoOptions {
    ProntoOptions {
        grad_tol: opts.terminal_grad_tol,
        grad_scale: GradScale::Cost,
        ..opts.pronto.clone()
    }
}

/// Terminal-state sensitivity `D beta(x_T)` by forward differences; each
/// column re-solves from `warm` with the target moved by `delta` (normalized
/// units) along one axis. `base` is `beta(x_T)`. On a failed solve the step
/// is reduced tenfold once.
#[allow(clippy::too_many_arguments)]
pub fn dbeta<S: ControlSystem + ?Sized>(
    sys: &S,
    spec: &CostSpec,
    warm: &Trajectory,
    base: &Vector,
    scaling: &StateScaling,
    delta: f64,
    popts: &ProntoOptions,
    interrupt: &dyn Interrupt,
) -> Result<Matrix> {
    let n = base.len();
    let mut d = Matrix::zeros(n, n);
    for j in 0..n {
        let mut col = None;
        let mut step = delta;
        for _ in 0..2 {
            let mut xt = spec.x_target().clone();
            let hj = step * scaling.scales()[j];
            xt[j] += hj;
            let s = spec.with_terminal(spec.rho_f(), xt)?;
            match pronto_solve(sys, &s, warm, popts, interrupt) {
                Ok(sol) => {
                    col = Some((sol.trajectory.final_state() - base) / hj);
                    break;
                }
                Err(f) if f.error == Error::Interrupted => return Err(Error::Interrupted),
                Err(f) => {
                    if step < delta {
                        return Err(f.error);
                    }
                    step *= 0.1;
                }
            }
        }
        match col {
            Some(c) => d.set_column(j, &c),
            None => return Err(Error::LineSearchFailure { halvings: 0 }),
        }
    }
    Ok(d)
}

/// `S^-1 D S` for the diagonal scaling `S`.
fn normalized_matrix(d: &Matrix, scaling: &StateScaling) -> Matrix {
    let s = scaling.scales();
    Matrix::from_fn(d.nrows(), d.ncols(), |i, j| d[(i, j)] * s[j] / s[i])
}

/// Step 3: remove the embedding input and enforce `x(T) = x_f`, increasing
/// `rho_f` while the terminal error exceeds `delta_f_tol` and otherwise
/// updating the target by `x_T += D beta^-1 (x_f - beta(x_T))`.
pub fn step3_enforce_final_state<S: HybridSystem + ?Sized>(
    sys: &S,
    prob: &DesignProblem,
    desired: &Desired,
    embedding_optimum: &Trajectory,
    opts: &StrategyOptions,
    trace: &mut StrategyTrace,
    hooks: &mut Hooks<'_>,
) -> StrategyResult<TerminalOptimum> {
    let under = Underactuated(sys);
    let m = sys.n_act();
    let popts = terminal_options(opts);
    let start = project_curve(&under, &prob.x0, &embedding_optimum.truncate_inputs(m), &opts.pronto)
        .map_err(|e| failure(e, trace, Some(embedding_optimum)))?;
    let target = desired.target().map_err(|e| failure(e, trace, None))?;
    let mut rho_f = opts.rho_f.rho0;
    let mut x_target = prob.xf.clone();
    let mut warm = start;
    let mut iterates = Vec::new();
    let mut last_dbeta = None;
    // Last accepted iterate of the Newton phase and the pending update.
    struct Base {
        target: Vector,
        step: Vector,
        gamma: f64,
        halvings: usize,
        error: f64,
        trajectory: Trajectory,
    }
    let mut base: Option<Base> = None;
    for _ in 0..opts.rho_f.max_steps {
        let spec = CostSpec::new(
            prob.q.clone(),
            prob.r.clone(),
            0.0,
            0,
            rho_f,
            x_target.clone(),
            target.clone(),
        )
        .map_err(|e| failure(e, trace, Some(&warm)))?;
        let sol = match pronto_solve(&under, &spec, &warm, &popts, hooks.interrupt) {
            Ok(s) => s,
            Err(f) => return Err(failure(f.error, trace, Some(&f.trajectory))),
        };
        let beta = sol.trajectory.final_state().clone();
        let err = prob.scaling.inf_norm(&(&beta - &prob.xf));
        iterates.push(sol.trajectory.clone());
        let (cost, iterations, gradient, status) = record_of(&sol);
        let accepted = err < opts.eps_f_tol;
        let rejected = !accepted && base.as_ref().is_some_and(|b| err > (1.0 - 0.5 * b.gamma) * b.error);
        let phase = if rejected {
            Phase::TargetBacktrack
        } else if base.is_none() && err > opts.delta_f_tol {
            Phase::RhoF
        } else {
            Phase::TargetNewton
        };
        let mut rec = TraceRecord {
            step: trace.records.len(),
            phase,
            accepted,
            rho_emb: None,
            rho_f,
            u_emb_norm: None,
            terminal_error: err,
            x_target: x_target.iter().copied().collect(),
            cost,
            iterations,
            gradient,
            status,
            dbeta_cond: None,
        };
        if accepted {
            (hooks.observer)(&rec);
            trace.records.push(rec);
            return Ok(TerminalOptimum {
                trajectory: sol.trajectory,
                x_target,
                rho_f,
                terminal_error: err,
                iterates,
                dbeta: last_dbeta,
            });
        }
        match phase {
            Phase::RhoF => {
                rho_f *= opts.rho_f.factor;
                warm = sol.trajectory;
            }
            Phase::TargetBacktrack => {
                let b = base.as_mut().expect("backtracking needs a base iterate");
                if b.halvings == opts.max_target_halvings {
                    (hooks.observer)(&rec);
                    trace.records.push(rec);
                    let last = b.trajectory.clone();
                    return Err(failure(
                        Error::ContinuationStall {
                            steps: trace.records.len(),
                            residual: b.error,
                        },
                        trace,
                        Some(&last),
                    ));
                }
                b.halvings += 1;
                b.gamma *= 0.5;
                x_target = &b.target + &b.step * b.gamma;
                warm = b.trajectory.clone();
            }
            _ => {
                let d = match dbeta(
                    &under,
                    &spec,
                    &sol.trajectory,
                    &beta,
                    &prob.scaling,
                    opts.dbeta_step,
                    &popts,
                    hooks.interrupt,
                ) {
                    Ok(d) => d,
                    Err(e) => {
                        (hooks.observer)(&rec);
                        trace.records.push(rec);
                        return Err(failure(e, trace, Some(&sol.trajectory)));
                    }
                };
                let dn = normalized_matrix(&d, &prob.scaling);
                let cond = linalg::condition_number(&dn);
                rec.dbeta_cond = Some(cond);
                if !(cond <= opts.max_dbeta_cond) {
                    (hooks.observer)(&rec);
                    trace.records.push(rec);
                    return Err(failure(Error::SingularDbeta { cond }, trace, Some(&sol.trajectory)));
                }
                let rhs = prob.scaling.normalize(&(&prob.xf - &beta));
                let dy = match linalg::lu_solve(&dn, &rhs) {
                    Some(v) => v,
                    None => {
                        (hooks.observer)(&rec);
                        trace.records.push(rec);
                        return Err(failure(Error::SingularDbeta { cond }, trace, Some(&sol.trajectory)));
                    }
                };
                let step = prob.scaling.denormalize(&dy);
                let next = &x_target + &step;
                base = Some(Base {
                    target: core::mem::replace(&mut x_target, next),
                    step,
                    gamma: 1.0,
                    halvings: 0,
                    error: err,
                    trajectory: sol.trajectory.clone(),
                });
                last_dbeta = Some(d);
                warm = sol.trajectory;
            }
        }
        (hooks.observer)(&rec);
        trace.records.push(rec);
    }
    let residual = trace.records.last().map_or(f64::NAN, |r| r.terminal_error);
    Err(failure(
        Error::ContinuationStall {
            steps: opts.rho_f.max_steps,
            residual,
        },
        trace,
        Some(&warm),
    ))
}
