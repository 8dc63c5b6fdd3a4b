use super::{eval_cost, project, CostSpec, DescentDirection, FeedbackGain};
use crate::dynamics::ControlSystem;
use crate::integrate::Trajectory;
use crate::{Error, Result, Vector};

/// Armijo backtracking parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineSearchParams {
    pub alpha: f64,
    pub factor: f64,
    pub max_halvings: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            alpha: 0.4,
            factor: 0.5,
            max_halvings: 20,
        }
    }
}

/// Accepted step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub gamma: f64,
    pub trajectory: Trajectory,
    pub cost: f64,
}

/// Backtracks `gamma = 1, 1/2, ...` until
/// `g(P(xi + gamma zeta)) <= g(xi) + alpha gamma Dg.zeta`. Steps whose
/// projection diverges count as rejected.
#[allow(clippy::too_many_arguments)]
pub fn line_search<S: ControlSystem + ?Sized>(
    sys: &S,
    spec: &CostSpec,
    x0: &Vector,
    traj: &Trajectory,
    cost: f64,
    dir: &DescentDirection,
    gain: &FeedbackGain,
    params: &LineSearchParams,
    bound: f64,
) -> Result<StepOutcome> {
    if !(dir.slope < 0.0) {
        return Err(Error::InvalidParameter("line search needs a descent direction".into()));
    }
    let mut gamma = 1.0;
    for _ in 0..=params.max_halvings {
        let candidate = traj.axpy(gamma, &dir.z, &dir.v);
        match project(sys, x0, &candidate, gain, bound) {
            Ok(eta) => {
                let c = eval_cost(spec, &eta)?;
                if c <= cost + params.alpha * gamma * dir.slope {
                    return Ok(StepOutcome {
                        gamma,
                        trajectory: eta,
                        cost: c,
                    });
                }
            }
            Err(Error::Divergence { .. } | Error::NonFiniteState { .. } | Error::SingularMassMatrix) => {}
            Err(e) => return Err(e),
        }
        gamma *= params.factor;
    }
    Err(Error::LineSearchFailure {
        halvings: params.max_halvings,
    })
}
