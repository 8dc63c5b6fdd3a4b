use alloc::vec::Vec;

use super::FeedbackGain;
use crate::dynamics::ControlSystem;
use crate::integrate::{rk4_step, Curve, Trajectory};
use crate::linalg;
use crate::{Error, Result, Vector};

/// Projection `P(xi)`: runs `u_k = mu_k + K_k (alpha_k - x_k)` in closed loop
/// from `x0`, each input held over its interval. Fails with
/// [`Error::Divergence`] once `|x|_inf` exceeds `bound`.
pub fn project<S: ControlSystem + ?Sized>(
    sys: &S,
    x0: &Vector,
    xi: &Curve,
    gain: &FeedbackGain,
    bound: f64,
) -> Result<Trajectory> {
    let nodes = xi.grid.nodes();
    if gain.gains.len() != nodes {
        return Err(Error::Dimension {
            what: "feedback gain nodes",
            expected: nodes,
            found: gain.gains.len(),
        });
    }
    if x0.len() != sys.state_dim() || xi.state_dim() != sys.state_dim() {
        return Err(Error::Dimension {
            what: "projection state",
            expected: sys.state_dim(),
            found: x0.len(),
        });
    }
    if xi.input_dim() != sys.input_dim() {
        return Err(Error::Dimension {
            what: "projection input",
            expected: sys.input_dim(),
            found: xi.input_dim(),
        });
    }
    let h = xi.grid.step();
    let mut states: Vec<Vector> = Vec::with_capacity(nodes);
    let mut inputs: Vec<Vector> = Vec::with_capacity(nodes);
    let mut x = x0.clone();
    for k in 0..xi.grid.intervals() {
        let u = &xi.inputs[k] + &gain.gains[k] * (&xi.states[k] - &x);
        let next = rk4_step(sys, &x, &u, h)?;
        if !linalg::all_finite(&next) {
            return Err(Error::NonFiniteState { node: k + 1 });
        }
        let norm = linalg::inf_norm(&next);
        if norm > bound {
            return Err(Error::Divergence { node: k + 1, norm });
        }
        states.push(x);
        inputs.push(u);
        x = next;
    }
    states.push(x);
    inputs.push(inputs[inputs.len() - 1].clone());
    Ok(Trajectory::from_integrated(Curve {
        grid: xi.grid,
        states,
        inputs,
    }))
}
