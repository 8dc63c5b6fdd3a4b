//! Uniform time grids, curves and trajectories, fixed-step RK4 and
//! linearization along curves.
//!
//! Inputs on a [`Trajectory`] are held constant over each interval
//! `[t_k, t_{k+1})` (zero-order hold). The sample at the last node repeats
//! the last held value so every curve has `N + 1` input samples.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::dynamics::ControlSystem;
use crate::{linalg, Error, Matrix, Result, Vector};

/// Smallest admissible number of intervals.
pub const MIN_INTERVALS: usize = 100;

/// Uniform grid `t_k = k T / N` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    intervals: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, intervals: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if intervals < MIN_INTERVALS {
            return Err(Error::InvalidParameter(alloc::format!(
                "at least {MIN_INTERVALS} intervals required, got {intervals}"
            )));
        }
        Ok(Self { horizon, intervals })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn nodes(&self) -> usize {
        self.intervals + 1
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.intervals as f64
    }

    /// Node time; the last node is `T` exactly.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.intervals {
            self.horizon
        } else {
            self.horizon * k as f64 / self.intervals as f64
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes()).map(|k| self.time(k))
    }

    /// Trapezoidal quadrature weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.step();
        let mut w = alloc::vec![h; self.nodes()];
        w[0] = 0.5 * h;
        w[self.intervals] = 0.5 * h;
        w
    }
}

/// State and input samples on a grid; not necessarily dynamically feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub grid: TimeGrid,
    pub states: Vec<Vector>,
    pub inputs: Vec<Vector>,
}

impl Curve {
    pub fn new(grid: TimeGrid, states: Vec<Vector>, inputs: Vec<Vector>) -> Result<Self> {
        let curve = Self { grid, states, inputs };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.nodes();
        for (what, len) in [("state samples", self.states.len()), ("input samples", self.inputs.len())] {
            if len != n {
                return Err(Error::Dimension {
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        let nx = self.states[0].len();
        let nu = self.inputs[0].len();
        for (k, (x, u)) in self.states.iter().zip(&self.inputs).enumerate() {
            if x.len() != nx || u.len() != nu {
                return Err(Error::Dimension {
                    what: "sample dimension",
                    expected: nx,
                    found: x.len(),
                });
            }
            if !linalg::all_finite(x) || !linalg::all_finite(u) {
                return Err(Error::NonFiniteState { node: k });
            }
        }
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn initial_state(&self) -> &Vector {
        &self.states[0]
    }

    pub fn final_state(&self) -> &Vector {
        &self.states[self.grid.intervals()]
    }

    /// `self + gamma * direction`, sample by sample.
    pub fn axpy(&self, gamma: f64, states: &[Vector], inputs: &[Vector]) -> Curve {
        Curve {
            grid: self.grid,
            states: self.states.iter().zip(states).map(|(x, z)| x + z * gamma).collect(),
            inputs: self.inputs.iter().zip(inputs).map(|(u, v)| u + v * gamma).collect(),
        }
    }

    /// Keeps the first `m` input components.
    pub fn truncate_inputs(&self, m: usize) -> Curve {
        Curve {
            grid: self.grid,
            states: self.states.clone(),
            inputs: self.inputs.iter().map(|u| u.rows(0, m).into_owned()).collect(),
        }
    }

    /// Appends `p` zero input components.
    pub fn pad_inputs(&self, p: usize) -> Curve {
        Curve {
            grid: self.grid,
            states: self.states.clone(),
            inputs: self
                .inputs
                .iter()
                .map(|u| linalg::vstack(u, &Vector::zeros(p)))
                .collect(),
        }
    }
}

/// A curve that satisfies the (zero-order-hold) dynamics on its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory(Curve);

impl Trajectory {
    /// Wraps a curve after checking its one-step defect against `tol`.
    pub fn from_curve<S: ControlSystem + ?Sized>(sys: &S, curve: Curve, tol: f64) -> Result<Self> {
        curve.validate()?;
        let d = defect(sys, &curve)?;
        if d > tol {
            return Err(Error::InvalidParameter(alloc::format!(
                "curve violates the dynamics (defect {d:e} > {tol:e})"
            )));
        }
        Ok(Self(curve))
    }

    /// Wraps a curve produced by integration. Callers guarantee feasibility.
    pub(crate) fn from_integrated(curve: Curve) -> Self {
        Self(curve)
    }

    pub fn curve(&self) -> &Curve {
        &self.0
    }

    pub fn into_curve(self) -> Curve {
        self.0
    }
}

impl core::ops::Deref for Trajectory {
    type Target = Curve;
    fn deref(&self) -> &Curve {
        &self.0
    }
}

/// One classical RK4 step with the input held at `u`.
pub fn rk4_step<S: ControlSystem + ?Sized>(sys: &S, x: &Vector, u: &Vector, h: f64) -> Result<Vector> {
    let k1 = sys.dynamics(x, u)?;
    let k2 = sys.dynamics(&(x + &k1 * (0.5 * h)), u)?;
    let k3 = sys.dynamics(&(x + &k2 * (0.5 * h)), u)?;
    let k4 = sys.dynamics(&(x + &k3 * h), u)?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Integrates `x' = F(x, input(t))` with RK4 on `grid`, evaluating the input
/// signal at the stage times. Returns the sampled curve (inputs sampled at
/// the nodes).
pub fn integrate<S, F>(sys: &S, x0: &Vector, input: F, grid: &TimeGrid) -> Result<Curve>
where
    S: ControlSystem + ?Sized,
    F: Fn(f64) -> Vector,
{
    let h = grid.step();
    let mut states = Vec::with_capacity(grid.nodes());
    let mut inputs = Vec::with_capacity(grid.nodes());
    let mut x = x0.clone();
    for k in 0..grid.intervals() {
        let t = grid.time(k);
        let u0 = input(t);
        let um = input(t + 0.5 * h);
        let u1 = input(grid.time(k + 1));
        let k1 = sys.dynamics(&x, &u0)?;
        let k2 = sys.dynamics(&(&x + &k1 * (0.5 * h)), &um)?;
        let k3 = sys.dynamics(&(&x + &k2 * (0.5 * h)), &um)?;
        let k4 = sys.dynamics(&(&x + &k3 * h), &u1)?;
        let next = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        states.push(x);
        inputs.push(u0);
        if !linalg::all_finite(&next) {
            return Err(Error::NonFiniteState { node: k + 1 });
        }
        x = next;
    }
    states.push(x);
    inputs.push(input(grid.horizon()));
    Ok(Curve {
        grid: *grid,
        states,
        inputs,
    })
}

/// Integrates node inputs with zero-order hold; `inputs[k]` acts on
/// `[t_k, t_{k+1})`. The returned trajectory repeats `inputs[N-1]` at node `N`.
pub fn simulate<S: ControlSystem + ?Sized>(
    sys: &S,
    x0: &Vector,
    inputs: &[Vector],
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let n = grid.intervals();
    if inputs.len() < n {
        return Err(Error::Dimension {
            what: "input samples",
            expected: n,
            found: inputs.len(),
        });
    }
    let h = grid.step();
    let mut states = Vec::with_capacity(n + 1);
    states.push(x0.clone());
    for k in 0..n {
        let next = rk4_step(sys, &states[k], &inputs[k], h)?;
        if !linalg::all_finite(&next) {
            return Err(Error::NonFiniteState { node: k + 1 });
        }
        states.push(next);
    }
    let mut us: Vec<Vector> = inputs[..n].to_vec();
    us.push(inputs[n - 1].clone());
    Ok(Trajectory(Curve {
        grid: *grid,
        states,
        inputs: us,
    }))
}

/// Largest one-step mismatch `|x_{k+1} - Phi_h(x_k, u_k)|_inf`.
pub fn defect<S: ControlSystem + ?Sized>(sys: &S, curve: &Curve) -> Result<f64> {
    let h = curve.grid.step();
    let mut worst = 0.0_f64;
    for k in 0..curve.grid.intervals() {
        let pred = rk4_step(sys, &curve.states[k], &curve.inputs[k], h)?;
        worst = worst.max(linalg::inf_norm(&(pred - &curve.states[k + 1])));
    }
    Ok(worst)
}

/// Exact Jacobians `(dPhi/dx, dPhi/du)` of one RK4 step, by differentiating
/// the four stages with the system Jacobians.
pub fn step_jacobians<S: ControlSystem + ?Sized>(
    sys: &S,
    x: &Vector,
    u: &Vector,
    h: f64,
) -> Result<(Matrix, Matrix)> {
    let n = x.len();
    let eye = Matrix::identity(n, n);
    let k1 = sys.dynamics(x, u)?;
    let (a1, b1) = sys.jacobians(x, u)?;
    let x2 = x + &k1 * (0.5 * h);
    let k2 = sys.dynamics(&x2, u)?;
    let (a2, b2) = sys.jacobians(&x2, u)?;
    let x3 = x + &k2 * (0.5 * h);
    let k3 = sys.dynamics(&x3, u)?;
    let (a3, b3) = sys.jacobians(&x3, u)?;
    let x4 = x + &k3 * h;
    let (a4, b4) = sys.jacobians(&x4, u)?;

    let dk1x = a1;
    let dk1u = b1;
    let dk2x = &a2 * (&eye + &dk1x * (0.5 * h));
    let dk2u = &a2 * &dk1u * (0.5 * h) + b2;
    let dk3x = &a3 * (&eye + &dk2x * (0.5 * h));
    let dk3u = &a3 * &dk2u * (0.5 * h) + b3;
    let dk4x = &a4 * (&eye + &dk3x * h);
    let dk4u = &a4 * &dk3u * h + b4;

    let ad = eye + (dk1x + dk2x * 2.0 + dk3x * 2.0 + dk4x) * (h / 6.0);
    let bd = (dk1u + dk2u * 2.0 + dk3u * 2.0 + dk4u) * (h / 6.0);
    Ok((ad, bd))
}

/// How Jacobians along a curve are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianMethod {
    /// Whatever the system provides (closed form when available).
    #[default]
    Model,
    /// Central differences of the vector field.
    FiniteDifference,
}

/// Continuous-time Jacobians `(A(t_k), B(t_k))` at every node of `curve`.
pub fn linearize<S: ControlSystem + ?Sized>(
    sys: &S,
    curve: &Curve,
    method: JacobianMethod,
) -> Result<Vec<(Matrix, Matrix)>> {
    curve
        .states
        .iter()
        .zip(&curve.inputs)
        .map(|(x, u)| match method {
            JacobianMethod::Model => sys.jacobians(x, u),
            JacobianMethod::FiniteDifference => crate::dynamics::fd_jacobians(sys, x, u),
        })
        .collect()
}

/// Central-difference Jacobian with per-component step `max(1e-6, 1e-7 |x_i|)`.
pub fn finite_diff_jacobian(f: &dyn Fn(&Vector) -> Vector, x: &Vector) -> Matrix {
    let f0 = f(x);
    let mut jac = Matrix::zeros(f0.len(), x.len());
    for j in 0..x.len() {
        let h = (1e-7 * x[j].abs()).max(1e-6);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        jac.set_column(j, &((f(&xp) - f(&xm)) / (2.0 * h)));
    }
    jac
}
