use alloc::format;
use alloc::vec::Vec;

use crate::integrate::Curve;
use crate::linalg;
use crate::{Error, Matrix, Result, Vector};

/// Tracking cost
///
/// `1/2 int |x - x_d|_Q^2 + |u - u_d|_R^2 + rho_emb^2 |u_emb - u_emb,d|^2 dt
///  + 1/2 rho_f^2 |x(T) - x_T|^2`.
///
/// Inputs are ordered `[u; u_emb]`; `u_emb` has `n_emb` components and is
/// absent (`n_emb = 0`) on the underactuated system.
#[derive(Debug, Clone)]
pub struct CostSpec {
    q: Matrix,
    r: Matrix,
    rho_emb: f64,
    n_emb: usize,
    rho_f: f64,
    x_target: Vector,
    desired: Curve,
    input_weight: Matrix,
}

impl CostSpec {
    pub fn new(
        q: Matrix,
        r: Matrix,
        rho_emb: f64,
        n_emb: usize,
        rho_f: f64,
        x_target: Vector,
        desired: Curve,
    ) -> Result<Self> {
        desired.validate()?;
        let n = desired.state_dim();
        let p = desired.input_dim();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::Dimension {
                what: "state weight Q",
                expected: n,
                found: q.nrows(),
            });
        }
        if r.nrows() != r.ncols() || r.nrows() + n_emb != p {
            return Err(Error::Dimension {
                what: "input weight R",
                expected: p - n_emb.min(p),
                found: r.nrows(),
            });
        }
        if x_target.len() != n {
            return Err(Error::Dimension {
                what: "target state",
                expected: n,
                found: x_target.len(),
            });
        }
        if !(rho_emb >= 0.0 && rho_emb.is_finite() && rho_f >= 0.0 && rho_f.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "penalty weights must be finite and nonnegative (rho_emb = {rho_emb}, rho_f = {rho_f})"
            )));
        }
        if n_emb > 0 && rho_emb == 0.0 {
            return Err(Error::InvalidParameter(
                "rho_emb must be positive when an embedding input is present".into(),
            ));
        }
        if linalg::max_abs(&(&q - q.transpose())) > 1e-12 * (1.0 + linalg::max_abs(&q)) {
            return Err(Error::InvalidParameter("Q is not symmetric".into()));
        }
        let min_eig = q.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-12 * (1.0 + linalg::max_abs(&q)) {
            return Err(Error::InvalidParameter(format!(
                "Q is not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        if linalg::max_abs(&(&r - r.transpose())) > 1e-12 * (1.0 + linalg::max_abs(&r)) {
            return Err(Error::InvalidParameter("R is not symmetric".into()));
        }
        if r.clone().cholesky().is_none() {
            return Err(Error::InvalidParameter("R is not positive definite".into()));
        }
        let input_weight = linalg::block_diag(&r, &(Matrix::identity(n_emb, n_emb) * (rho_emb * rho_emb)));
        Ok(Self {
            q,
            r,
            rho_emb,
            n_emb,
            rho_f,
            x_target,
            desired,
            input_weight,
        })
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn rho_emb(&self) -> f64 {
        self.rho_emb
    }

    pub fn n_emb(&self) -> usize {
        self.n_emb
    }

    pub fn rho_f(&self) -> f64 {
        self.rho_f
    }

    pub fn x_target(&self) -> &Vector {
        &self.x_target
    }

    pub fn desired(&self) -> &Curve {
        &self.desired
    }

    /// `blkdiag(R, rho_emb^2 I)`, the full input Hessian of the integrand.
    pub fn input_weight(&self) -> &Matrix {
        &self.input_weight
    }

    pub fn with_rho_emb(&self, rho_emb: f64) -> Result<Self> {
        Self::new(
            self.q.clone(),
            self.r.clone(),
            rho_emb,
            self.n_emb,
            self.rho_f,
            self.x_target.clone(),
            self.desired.clone(),
        )
    }

    pub fn with_terminal(&self, rho_f: f64, x_target: Vector) -> Result<Self> {
        Self::new(
            self.q.clone(),
            self.r.clone(),
            self.rho_emb,
            self.n_emb,
            rho_f,
            x_target,
            self.desired.clone(),
        )
    }

    fn check_grid(&self, curve: &Curve) -> Result<()> {
        if curve.grid != self.desired.grid {
            return Err(Error::InvalidParameter("curve and desired curve use different grids".into()));
        }
        if curve.state_dim() != self.desired.state_dim() {
            return Err(Error::Dimension {
                what: "curve state",
                expected: self.desired.state_dim(),
                found: curve.state_dim(),
            });
        }
        if curve.input_dim() != self.desired.input_dim() {
            return Err(Error::Dimension {
                what: "curve input",
                expected: self.desired.input_dim(),
                found: curve.input_dim(),
            });
        }
        Ok(())
    }
}

/// Trapezoidal evaluation of the cost on the node samples of `curve`.
pub fn eval_cost(spec: &CostSpec, curve: &Curve) -> Result<f64> {
    spec.check_grid(curve)?;
    let w = curve.grid.trapezoid_weights();
    let d = &spec.desired;
    let mut total = 0.0;
    for k in 0..curve.grid.nodes() {
        let ex = &curve.states[k] - &d.states[k];
        let eu = &curve.inputs[k] - &d.inputs[k];
        total += 0.5 * w[k] * (ex.dot(&(&spec.q * &ex)) + eu.dot(&(&spec.input_weight * &eu)));
    }
    let ef = curve.final_state() - &spec.x_target;
    total += 0.5 * spec.rho_f * spec.rho_f * ef.norm_squared();
    Ok(total)
}

/// Gradient of the discretized cost with respect to the node states and the
/// interval inputs of a zero-order-hold trajectory.
///
/// The input at node `N` repeats `u_{N-1}`, so its quadrature term is folded
/// into `u[N-1]`. `x[0]` is included for completeness; the initial state is
/// fixed during optimization.
#[derive(Debug, Clone)]
pub struct CostGradient {
    /// `N + 1` state gradients.
    pub x: Vec<Vector>,
    /// `N` input gradients.
    pub u: Vec<Vector>,
    /// Trapezoid weights of the grid.
    pub weights: Vec<f64>,
}

impl CostGradient {
    pub fn new(spec: &CostSpec, curve: &Curve) -> Result<Self> {
        spec.check_grid(curve)?;
        let n_int = curve.grid.intervals();
        let w = curve.grid.trapezoid_weights();
        let d = &spec.desired;
        let mut gx: Vec<Vector> = (0..=n_int)
            .map(|k| &spec.q * (&curve.states[k] - &d.states[k]) * w[k])
            .collect();
        gx[n_int] += (curve.final_state() - &spec.x_target) * (spec.rho_f * spec.rho_f);
        let mut gu: Vec<Vector> = (0..n_int)
            .map(|k| &spec.input_weight * (&curve.inputs[k] - &d.inputs[k]) * w[k])
            .collect();
        gu[n_int - 1] += &spec.input_weight * (&curve.inputs[n_int] - &d.inputs[n_int]) * w[n_int];
        Ok(Self { x: gx, u: gu, weights: w })
    }

    /// `Dg . (z, v)` for a tangent direction with `z_0 = 0`.
    pub fn apply(&self, z: &[Vector], v: &[Vector]) -> f64 {
        let sx: f64 = self.x.iter().zip(z).skip(1).map(|(g, z)| g.dot(z)).sum();
        let su: f64 = self.u.iter().zip(v).map(|(g, v)| g.dot(v)).sum();
        sx + su
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::TimeGrid;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn scalar_curve(grid: TimeGrid, x: impl Fn(f64) -> f64, u: impl Fn(f64) -> f64) -> Curve {
        let states = grid.times().map(|t| Vector::from_element(1, x(t))).collect();
        let inputs = grid.times().map(|t| Vector::from_element(1, u(t))).collect();
        Curve::new(grid, states, inputs).unwrap()
    }

    fn scalar_spec(desired: Curve, q: f64, r: f64, rho_f: f64, xt: f64) -> CostSpec {
        CostSpec::new(
            Matrix::from_element(1, 1, q),
            Matrix::from_element(1, 1, r),
            0.0,
            0,
            rho_f,
            Vector::from_element(1, xt),
            desired,
        )
        .unwrap()
    }

    #[test]
    fn desired_curve_has_zero_cost() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let d = scalar_curve(grid, |t| t.sin(), |t| t * t);
        let spec = scalar_spec(d.clone(), 3.0, 0.5, 10.0, 1.0_f64.sin());
        assert_eq!(eval_cost(&spec, &d).unwrap(), 0.0);
    }

    #[test]
    fn constant_residual() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let d = scalar_curve(grid, |_| 0.0, |_| 0.0);
        let c = scalar_curve(grid, |_| 1.0, |_| 0.0);
        let spec = scalar_spec(d, 2.0, 1.0, 0.0, 0.0);
        assert_relative_eq!(eval_cost(&spec, &c).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn terminal_and_embedding_terms() {
        let grid = TimeGrid::new(2.0, 100).unwrap();
        let states = vec![Vector::zeros(1); 101];
        let d = Curve::new(grid, states.clone(), vec![Vector::zeros(2); 101]).unwrap();
        let c = Curve::new(grid, states, vec![Vector::from_vec(vec![0.0, 1.0]); 101]).unwrap();
        let spec = CostSpec::new(
            Matrix::identity(1, 1),
            Matrix::identity(1, 1),
            3.0,
            1,
            2.0,
            Vector::from_element(1, 0.5),
            d,
        )
        .unwrap();
        // 1/2 * 9 * 2 + 1/2 * 4 * 0.25
        assert_relative_eq!(eval_cost(&spec, &c).unwrap(), 9.5, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_converges() {
        let cost = |n: usize| {
            let grid = TimeGrid::new(1.0, n).unwrap();
            let d = scalar_curve(grid, |_| 0.0, |_| 0.0);
            let c = scalar_curve(grid, |t| (3.0 * t).sin(), |t| t.exp());
            eval_cost(&scalar_spec(d, 1.0, 0.1, 0.0, 0.0), &c).unwrap()
        };
        let (a, b) = (cost(10_000), cost(20_000));
        assert!(((a - b) / b).abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn rejects_bad_weights() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let d = scalar_curve(grid, |_| 0.0, |_| 0.0);
        let bad_r = CostSpec::new(
            Matrix::identity(1, 1),
            Matrix::zeros(1, 1),
            0.0,
            0,
            0.0,
            Vector::zeros(1),
            d.clone(),
        );
        assert!(bad_r.is_err());
        let bad_q = CostSpec::new(
            Matrix::from_element(1, 1, -1.0),
            Matrix::identity(1, 1),
            0.0,
            0,
            0.0,
            Vector::zeros(1),
            d.clone(),
        );
        assert!(bad_q.is_err());
        let bad_rho = CostSpec::new(
            Matrix::identity(1, 1),
            Matrix::identity(1, 1),
            0.0,
            0,
            -1.0,
            Vector::zeros(1),
            d,
        );
        assert!(bad_rho.is_err());
    }
}
