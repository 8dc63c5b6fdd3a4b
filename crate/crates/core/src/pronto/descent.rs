use alloc::vec::Vec;

use super::{CostGradient, CostSpec, FeedbackGain};
use crate::dynamics::ControlSystem;
use crate::integrate::{step_jacobians, Curve};
use crate::linalg;
use crate::{Error, Matrix, Result, Vector};

const BLOWUP: f64 = 1e14;

/// How second-order terms of the projected cost are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescentMode {
    /// Cost Hessian plus the curvature of the dynamics weighted by the
    /// closed-loop adjoint.
    #[default]
    Newton,
    /// Cost Hessian only.
    GaussNewton,
}

/// Step Jacobians `x_{k+1} = A_k x_k + B_k u_k` of the discretized dynamics
/// along a trajectory, one pair per interval.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub a: Vec<Matrix>,
    pub b: Vec<Matrix>,
}

pub fn discrete_linearization<S: ControlSystem + ?Sized>(sys: &S, traj: &Curve) -> Result<Linearization> {
    let h = traj.grid.step();
    let mut a = Vec::with_capacity(traj.grid.intervals());
    let mut b = Vec::with_capacity(traj.grid.intervals());
    for k in 0..traj.grid.intervals() {
        let (ak, bk) = step_jacobians(sys, &traj.states[k], &traj.inputs[k], h)?;
        a.push(ak);
        b.push(bk);
    }
    Ok(Linearization { a, b })
}

/// Search direction `zeta = (z, v)` in the tangent space of the trajectory
/// manifold, `z_0 = 0`, `z_{k+1} = A_k z_k + B_k v_k`.
#[derive(Debug, Clone)]
pub struct DescentDirection {
    /// `N + 1` state perturbations.
    pub z: Vec<Vector>,
    /// `N + 1` input perturbations; the last repeats `v[N-1]`.
    pub v: Vec<Vector>,
    /// `Dg . zeta`.
    pub slope: f64,
    /// `Dg . zeta + 1/2 D2g(zeta, zeta)`.
    pub model_change: f64,
    pub mode: DescentMode,
}

/// Second derivative of `lambda' F(x, u)` by central differences of the
/// system Jacobians, as an `(n + m)` square block matrix.
fn weighted_hessian<S: ControlSystem + ?Sized>(
    sys: &S,
    x: &Vector,
    u: &Vector,
    lambda: &Vector,
) -> Result<Matrix> {
    let n = x.len();
    let m = u.len();
    let grad = |x: &Vector, u: &Vector| -> Result<Vector> {
        let (a, b) = sys.jacobians(x, u)?;
        Ok(linalg::vstack(&(a.transpose() * lambda), &(b.transpose() * lambda)))
    };
    let mut hess = Matrix::zeros(n + m, n + m);
    for j in 0..n + m {
        let base = if j < n { x[j] } else { u[j - n] };
        let step = (1e-6 * base.abs()).max(1e-5);
        let (mut xp, mut xm, mut up, mut um) = (x.clone(), x.clone(), u.clone(), u.clone());
        if j < n {
            xp[j] += step;
            xm[j] -= step;
        } else {
            up[j - n] += step;
            um[j - n] -= step;
        }
        let col = (grad(&xp, &up)? - grad(&xm, &um)?) / (2.0 * step);
        hess.set_column(j, &col);
    }
    linalg::symmetrize(&mut hess);
    Ok(hess)
}

/// Solves the LQ subproblem
/// `min Dg . zeta + 1/2 D2g(zeta, zeta)` over tangent directions by a
/// backward Riccati sweep and a forward rollout.
///
/// In [`DescentMode::Newton`] the stage Hessians include
/// `h D2(lambda_{k+1}' F)(x_k, u_k)` where `lambda` is the adjoint of the
/// projection's closed loop (gain `gain`). Returns
/// [`Error::IndefiniteHessian`] when a stage input Hessian is not positive
/// definite; callers fall back to Gauss-Newton.
pub fn descent_direction<S: ControlSystem + ?Sized>(
    sys: &S,
    spec: &CostSpec,
    traj: &Curve,
    lin: &Linearization,
    gain: &FeedbackGain,
    mode: DescentMode,
) -> Result<DescentDirection> {
    let n_int = traj.grid.intervals();
    let n = traj.state_dim();
    let m = traj.input_dim();
    let h = traj.grid.step();
    let grad = CostGradient::new(spec, traj)?;
    let w = &grad.weights;
    let wu = spec.input_weight();

    // Stage Hessians of the integrand, [xx, xu; ux, uu].
    let mut stage: Vec<Matrix> = (0..n_int)
        .map(|k| {
            let mut s = Matrix::zeros(n + m, n + m);
            s.view_mut((0, 0), (n, n)).copy_from(&(spec.q() * w[k]));
            let uw = if k + 1 == n_int { w[k] + w[n_int] } else { w[k] };
            s.view_mut((n, n), (m, m)).copy_from(&(wu * uw));
            s
        })
        .collect();

    if mode == DescentMode::Newton {
        let mut lambda = grad.x[n_int].clone();
        for k in (0..n_int).rev() {
            let hk = weighted_hessian(sys, &traj.states[k], &traj.inputs[k], &lambda)? * h;
            stage[k] += hk;
            if k > 0 {
                let kk = &gain.gains[k];
                let acl = &lin.a[k] - &lin.b[k] * kk;
                lambda = &grad.x[k] - kk.transpose() * &grad.u[k] + acl.transpose() * &lambda;
            }
        }
    }

    let rho_f2 = spec.rho_f() * spec.rho_f();
    let p_final = spec.q() * w[n_int] + Matrix::identity(n, n) * rho_f2;
    let mut p = p_final.clone();
    let mut pv = grad.x[n_int].clone();
    let mut fb: Vec<Matrix> = alloc::vec![Matrix::zeros(0, 0); n_int];
    let mut ff: Vec<Vector> = alloc::vec![Vector::zeros(0); n_int];
    for k in (0..n_int).rev() {
        let (a, b) = (&lin.a[k], &lin.b[k]);
        let s = &stage[k];
        let pa = &p * a;
        let pb = &p * b;
        let qxx = s.view((0, 0), (n, n)) + a.transpose() * &pa;
        let qux = s.view((n, 0), (m, n)) + b.transpose() * &pa;
        let quu = s.view((n, n), (m, m)) + b.transpose() * &pb;
        let qx = &grad.x[k] + a.transpose() * &pv;
        let qu = &grad.u[k] + b.transpose() * &pv;
        let chol = quu.cholesky().ok_or(Error::IndefiniteHessian { node: k })?;
        let kk = chol.solve(&qux);
        let kf = -chol.solve(&qu);
        p = qxx - qux.transpose() * &kk;
        linalg::symmetrize(&mut p);
        pv = qx + qux.transpose() * &kf;
        let norm = p.norm();
        if !(norm <= BLOWUP) {
            return Err(Error::RiccatiBlowup { node: k, norm });
        }
        fb[k] = kk;
        ff[k] = kf;
    }

    let mut z = Vec::with_capacity(n_int + 1);
    let mut v = Vec::with_capacity(n_int + 1);
    z.push(Vector::zeros(n));
    let mut quad = 0.0;
    for k in 0..n_int {
        let vk = &ff[k] - &fb[k] * &z[k];
        let zv = linalg::vstack(&z[k], &vk);
        quad += zv.dot(&(&stage[k] * &zv));
        z.push(&lin.a[k] * &z[k] + &lin.b[k] * &vk);
        v.push(vk);
    }
    quad += z[n_int].dot(&(&p_final * &z[n_int]));
    v.push(v[n_int - 1].clone());
    let slope = grad.apply(&z, &v);
    let model_change = slope + 0.5 * quad;
    if !slope.is_finite() || !model_change.is_finite() {
        return Err(Error::NonFiniteState { node: 0 });
    }
    Ok(DescentDirection {
        z,
        v,
        slope,
        model_change,
        mode,
    })
}
