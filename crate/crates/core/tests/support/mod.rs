//! Fixtures and independent oracles shared by the test targets.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod biped;

use hybrid_orbits_core::dynamics::ControlSystem;
use hybrid_orbits_core::integrate::{simulate, step_jacobians, Curve, TimeGrid, Trajectory};
use hybrid_orbits_core::pronto::{discrete_linearization, CostSpec};
use hybrid_orbits_core::{Matrix, Result, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Linear {
    pub f: Matrix,
    pub g: Matrix,
}

impl ControlSystem for Linear {
    fn state_dim(&self) -> usize {
        self.f.nrows()
    }
    fn input_dim(&self) -> usize {
        self.g.ncols()
    }
    fn dynamics(&self, x: &Vector, u: &Vector) -> Result<Vector> {
        Ok(&self.f * x + &self.g * u)
    }
    fn jacobians(&self, _x: &Vector, _u: &Vector) -> Result<(Matrix, Matrix)> {
        Ok((self.f.clone(), self.g.clone()))
    }
}

/// Damped pendulum with torque input.
pub struct Pendulum;

impl ControlSystem for Pendulum {
    fn state_dim(&self) -> usize {
        2
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn dynamics(&self, x: &Vector, u: &Vector) -> Result<Vector> {
        Ok(Vector::from_vec(vec![x[1], -x[0].sin() - 0.1 * x[1] + u[0]]))
    }
    fn jacobians(&self, x: &Vector, _u: &Vector) -> Result<(Matrix, Matrix)> {
        Ok((
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, -x[0].cos(), -0.1]),
            Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        ))
    }
}

pub fn oscillator() -> Linear {
    Linear {
        f: Matrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -0.3]),
        g: Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
    }
}

pub fn zero_input_trajectory<S: ControlSystem>(sys: &S, x0: &Vector, grid: TimeGrid) -> Trajectory {
    let inputs = vec![Vector::zeros(sys.input_dim()); grid.nodes()];
    simulate(sys, x0, &inputs, &grid).unwrap()
}

pub fn sine_desired(grid: TimeGrid) -> Curve {
    let states = grid
        .times()
        .map(|t| Vector::from_vec(vec![(2.0 * t).sin(), 2.0 * (2.0 * t).cos()]))
        .collect();
    let inputs = grid.times().map(|t| Vector::from_element(1, 0.5 * t)).collect();
    Curve::new(grid, states, inputs).unwrap()
}

/// Minimizes the discretized cost over the stacked inputs `U` directly:
/// `X = Phi x0 + Gamma U`, cost quadratic in `U`, normal equations.
pub fn batch_lq_optimum(sys: &Linear, spec: &CostSpec, x0: &Vector) -> Vec<Vector> {
    let d = spec.desired();
    let grid = d.grid;
    let (nn, n, m) = (grid.intervals(), sys.state_dim(), sys.input_dim());
    let (ad, bd) = step_jacobians(sys, x0, &Vector::zeros(m), grid.step()).unwrap();
    let w = grid.trapezoid_weights();
    let mut phi = Matrix::zeros((nn + 1) * n, n);
    let mut gam = Matrix::zeros((nn + 1) * n, nn * m);
    let mut ak = Matrix::identity(n, n);
    for k in 0..=nn {
        phi.view_mut((k * n, 0), (n, n)).copy_from(&ak);
        ak = &ad * ak;
    }
    for k in 1..=nn {
        for j in 0..k {
            let mut blk = bd.clone();
            for _ in j + 1..k {
                blk = &ad * blk;
            }
            gam.view_mut((k * n, j * m), (n, m)).copy_from(&blk);
        }
    }
    let mut wx = Matrix::zeros((nn + 1) * n, (nn + 1) * n);
    let mut xd = Vector::zeros((nn + 1) * n);
    for k in 0..=nn {
        wx.view_mut((k * n, k * n), (n, n)).copy_from(&(spec.q() * w[k]));
        xd.rows_mut(k * n, n).copy_from(&d.states[k]);
    }
    let rho2 = spec.rho_f() * spec.rho_f();
    let mut target = &wx * xd;
    for i in 0..n {
        wx[(nn * n + i, nn * n + i)] += rho2;
    }
    target.rows_mut(nn * n, n).axpy(rho2, spec.x_target(), 1.0);
    let mut wu = Matrix::zeros(nn * m, nn * m);
    let mut ru = Vector::zeros(nn * m);
    let r = spec.input_weight();
    for k in 0..nn {
        let weight = if k + 1 == nn { w[k] + w[nn] } else { w[k] };
        wu.view_mut((k * m, k * m), (m, m)).copy_from(&(r * weight));
        let mut lin = r * &d.inputs[k] * w[k];
        if k + 1 == nn {
            lin += r * &d.inputs[nn] * w[nn];
        }
        ru.rows_mut(k * m, m).copy_from(&lin);
    }
    let h = gam.transpose() * &wx * &gam + wu;
    let rhs = gam.transpose() * (target - &wx * &phi * x0) + ru;
    let u = h.cholesky().unwrap().solve(&rhs);
    (0..nn).map(|k| u.rows(k * m, m).into_owned()).collect()
}

pub fn lq_spec(grid: TimeGrid, rho_f: f64) -> CostSpec {
    CostSpec::new(
        Matrix::from_diagonal(&Vector::from_vec(vec![10.0, 1.0])),
        Matrix::from_element(1, 1, 0.1),
        0.0,
        0,
        rho_f,
        Vector::from_vec(vec![0.3, -0.2]),
        sine_desired(grid),
    )
    .unwrap()
}


pub fn random_tangent<S: ControlSystem>(
    sys: &S,
    traj: &Curve,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vector>, Vec<Vector>) {
    let lin = discrete_linearization(sys, traj).unwrap();
    let nn = traj.grid.intervals();
    let (a0, a1, a2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..4.0));
    let mut z = vec![Vector::zeros(sys.state_dim())];
    let mut v = Vec::new();
    for k in 0..nn {
        let t = traj.grid.time(k);
        let vk = Vector::from_element(sys.input_dim(), a0 + a1 * (a2 * t).sin());
        z.push(&lin.a[k] * &z[k] + &lin.b[k] * &vk);
        v.push(vk);
    }
    v.push(v[nn - 1].clone());
    (z, v)
}

pub fn random_curve(grid: TimeGrid, rng: &mut ChaCha8Rng) -> Curve {
    let (a, b, c, d) = (
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.5..3.0),
        rng.random_range(-2.0..2.0),
    );
    let states = grid
        .times()
        .map(|t| Vector::from_vec(vec![a + b * (c * t).sin(), b * c * (c * t).cos() + rng.random_range(-0.1..0.1)]))
        .collect();
    let inputs = grid.times().map(|t| Vector::from_element(1, d * (t - 1.0))).collect();
    Curve::new(grid, states, inputs).unwrap()
}

/// Two unit masses joined by a spring, force on the first only. The jump
/// at `q1 = 1` shifts both positions back by one and swaps the velocities.
pub struct SpringPair {
    pub k: f64,
}

impl hybrid_orbits_core::dynamics::MechanicalModel for SpringPair {
    fn dof(&self) -> usize {
        2
    }
    fn n_act(&self) -> usize {
        1
    }
    fn mass(&self, _q: &Vector) -> Matrix {
        Matrix::identity(2, 2)
    }
    fn coriolis(&self, _q: &Vector, _qd: &Vector) -> Vector {
        Vector::zeros(2)
    }
    fn gravity(&self, q: &Vector) -> Vector {
        let d = self.k * (q[0] - q[1]);
        Vector::from_vec(vec![d, -d])
    }
    fn input_map(&self, _q: &Vector) -> Matrix {
        Matrix::from_column_slice(2, 1, &[1.0, 0.0])
    }
    fn embedding_map(&self, _q: &Vector) -> Matrix {
        Matrix::from_column_slice(2, 1, &[0.0, 1.0])
    }
}

impl hybrid_orbits_core::dynamics::HybridSystem for SpringPair {
    fn guard(&self, x: &Vector) -> f64 {
        x[0] - 1.0
    }
    fn jump(&self, x: &Vector) -> Result<Vector> {
        Ok(Vector::from_vec(vec![x[0] - 1.0, x[1] - 1.0, x[3], x[2]]))
    }
    fn inverse_jump(&self, x: &Vector) -> Result<Vector> {
        Ok(Vector::from_vec(vec![x[0] + 1.0, x[1] + 1.0, x[3], x[2]]))
    }
}
