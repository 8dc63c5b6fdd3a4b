//! Projection-operator Newton method for trajectory optimization.
//!
//! A curve `xi = (alpha, mu)` is mapped onto a trajectory by the feedback
//! system `u_k = mu_k + K_k (alpha_k - x_k)`, `x_{k+1} = Phi_h(x_k, u_k)`,
//! `x_0` fixed ([`project`]). The cost `g(xi) = h(P(xi))` is then minimized
//! without explicit dynamic constraints: every iterate is a trajectory.
//!
//! One iteration ([`pronto_solve`]):
//!
//! 1. design `K` about the current trajectory from a regulator Riccati
//!    equation ([`design_gain`]);
//! 2. solve the LQ subproblem `min Dg.zeta + 1/2 D2g(zeta, zeta)` over the
//!    tangent space, with second-order dynamics terms weighted by the
//!    closed-loop adjoint in Newton mode ([`descent_direction`]);
//! 3. backtrack on `g(P(xi + gamma zeta))` with an Armijo test ([`line_search`]);
//! 4. project.
//!
//! Trajectories hold inputs constant over each grid interval, and the cost is
//! the trapezoidal rule on the samples; all derivatives are exact for that
//! discretized problem.

mod cost;
mod descent;
mod gain;
mod line_search;
mod projection;
mod solver;

pub use cost::{eval_cost, CostGradient, CostSpec};
pub use descent::{descent_direction, discrete_linearization, DescentDirection, DescentMode, Linearization};
pub use gain::{design_gain, solve_riccati, FeedbackGain, GainWeights};
pub use line_search::{line_search, LineSearchParams, StepOutcome};
pub use projection::project;
pub use solver::{
    pronto_solve, GradScale, Interrupt, IterationRecord, NoInterrupt, ProntoFailure, ProntoOptions, ProntoSolution,
    SolveStatus,
};
