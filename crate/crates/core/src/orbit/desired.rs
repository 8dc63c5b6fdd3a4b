use alloc::vec::Vec;

use crate::dynamics::{inverse_dynamics, split_state, MechanicalModel};
use crate::integrate::{Curve, TimeGrid};
use crate::{Error, Result, Vector};

/// Interior knot of the desired curve: position and velocity of every joint
/// at time `t`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ViaPoint {
    pub t: f64,
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
}

/// Desired state curve with its exact second derivative.
#[derive(Debug, Clone)]
pub struct DesiredCurve {
    pub grid: TimeGrid,
    pub states: Vec<Vector>,
    pub accelerations: Vec<Vector>,
}

struct Knot {
    t: f64,
    q: Vector,
    qd: Vector,
}

fn hermite(k0: &Knot, k1: &Knot, t: f64) -> (Vector, Vector, Vector) {
    let tau = k1.t - k0.t;
    let s = (t - k0.t) / tau;
    let (s2, s3) = (s * s, s * s * s);
    let h = [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2];
    let dh = [6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s];
    let ddh = [12.0 * s - 6.0, 6.0 * s - 4.0, -12.0 * s + 6.0, 6.0 * s - 2.0];
    let combine = |c: &[f64; 4]| &k0.q * c[0] + &k0.qd * (tau * c[1]) + &k1.q * c[2] + &k1.qd * (tau * c[3]);
    (combine(&h), combine(&dh) / tau, combine(&ddh) / (tau * tau))
}

/// Piecewise cubic Hermite curve per joint through `x0` at `t = 0`, the via
/// points, and `xf` at `t = T`, sampled on `grid`. Positions and velocities
/// at the knots are matched exactly; accelerations are the exact second
/// derivative of the polynomials.
pub fn build_desired_curve(
    grid: &TimeGrid,
    dof: usize,
    x0: &Vector,
    xf: &Vector,
    via: &[ViaPoint],
) -> Result<DesiredCurve> {
    for x in [x0, xf] {
        if x.len() != 2 * dof {
            return Err(Error::Dimension {
                what: "boundary state",
                expected: 2 * dof,
                found: x.len(),
            });
        }
    }
    let (q0, qd0) = split_state(x0, dof);
    let (qf, qdf) = split_state(xf, dof);
    let mut knots = alloc::vec![Knot { t: 0.0, q: q0, qd: qd0 }];
    for v in via {
        if v.q.len() != dof || v.qd.len() != dof {
            return Err(Error::Dimension {
                what: "via point",
                expected: dof,
                found: v.q.len().min(v.qd.len()),
            });
        }
        let last = knots[knots.len() - 1].t;
        if !(v.t > last && v.t < grid.horizon()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "via point times must increase strictly inside (0, T); got {} after {}",
                v.t,
                last
            )));
        }
        knots.push(Knot {
            t: v.t,
            q: Vector::from_column_slice(&v.q),
            qd: Vector::from_column_slice(&v.qd),
        });
    }
    knots.push(Knot {
        t: grid.horizon(),
        q: qf,
        qd: qdf,
    });

    let mut states = Vec::with_capacity(grid.nodes());
    let mut accelerations = Vec::with_capacity(grid.nodes());
    let mut seg = 0;
    for k in 0..grid.nodes() {
        let t = grid.time(k);
        while seg + 2 < knots.len() && t >= knots[seg + 1].t {
            seg += 1;
        }
        let (q, qd, qdd) = if k == 0 {
            (knots[0].q.clone(), knots[0].qd.clone(), hermite(&knots[0], &knots[1], t).2)
        } else if k == grid.intervals() {
            let last = knots.len() - 1;
            let qdd = hermite(&knots[last - 1], &knots[last], t).2;
            (knots[last].q.clone(), knots[last].qd.clone(), qdd)
        } else {
            hermite(&knots[seg], &knots[seg + 1], t)
        };
        states.push(crate::linalg::vstack(&q, &qd));
        accelerations.push(qdd);
    }
    Ok(DesiredCurve {
        grid: *grid,
        states,
        accelerations,
    })
}

/// Inverse dynamics of the fully actuated embedding along the desired curve,
/// `u_d^e = Y^-1 (M qdd_d + C + G)`, one sample per node.
pub fn desired_embedding_input<M: MechanicalModel + ?Sized>(
    model: &M,
    desired: &DesiredCurve,
) -> Result<Vec<Vector>> {
    let n = model.dof();
    desired
        .states
        .iter()
        .zip(&desired.accelerations)
        .map(|(x, qdd)| {
            let (q, qd) = split_state(x, n);
            inverse_dynamics(model, &q, &qd, qdd)
        })
        .collect()
}

impl DesiredCurve {
    /// Pairs the states with node inputs.
    pub fn with_inputs(&self, inputs: Vec<Vector>) -> Result<Curve> {
        Curve::new(self.grid, self.states.clone(), inputs)
    }
}
