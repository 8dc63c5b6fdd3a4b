//! Underactuated mechanical systems with impacts.
//!
//! A [`MechanicalModel`] supplies the second-order form
//! `M(q) q'' + C(q, q') + G(q) = Y_u(q) u` together with an embedding input
//! map `Y_emb(q)` such that `Y = [Y_u Y_emb]` is square and invertible. The
//! state-space view uses `x = [q; q']`, so that
//!
//! ```text
//! x' = f(x) + g(x) u + g_emb(x) u_emb
//! f(x)     = [q'; -M^-1 (C + G)]
//! g(x)     = [0;   M^-1 Y_u]
//! g_emb(x) = [0;   M^-1 Y_emb]
//! ```
//!
//! A [`HybridSystem`] adds a scalar guard (zero on the jump set) and an
//! invertible jump map. [`ControlSystem`] is the flat `x' = F(x, u)`
//! interface used by the integrators and the optimizer; [`Underactuated`] and
//! [`Embedded`] adapt a mechanical model to it.

use alloc::vec::Vec;

use crate::{linalg, Error, Matrix, Result, Vector};

/// Closed-form maps of an `n_q`-DOF mechanism with `m < n_q` actuated inputs.
///
/// Partial derivatives default to central differences of the maps; models
/// with closed-form derivatives override them.
pub trait MechanicalModel {
    /// Number of generalized coordinates `n_q`.
    fn dof(&self) -> usize;
    /// Number of actuated inputs `m`.
    fn n_act(&self) -> usize;
    fn mass(&self, q: &Vector) -> Matrix;
    /// Coriolis/centrifugal vector, quadratic in `qd`.
    fn coriolis(&self, q: &Vector, qd: &Vector) -> Vector;
    fn gravity(&self, q: &Vector) -> Vector;
    /// `Y_u(q)`, `n_q x m`.
    fn input_map(&self, q: &Vector) -> Matrix;
    /// `Y_emb(q)`, `n_q x (n_q - m)`.
    fn embedding_map(&self, q: &Vector) -> Matrix;

    /// Number of embedding inputs `n_q - m`.
    fn n_emb(&self) -> usize {
        self.dof() - self.n_act()
    }

    /// `Y(q) = [Y_u(q) Y_emb(q)]`.
    fn full_input_map(&self, q: &Vector) -> Matrix {
        let yu = self.input_map(q);
        let ye = self.embedding_map(q);
        let n = self.dof();
        let mut y = Matrix::zeros(n, yu.ncols() + ye.ncols());
        y.view_mut((0, 0), (n, yu.ncols())).copy_from(&yu);
        y.view_mut((0, yu.ncols()), (n, ye.ncols())).copy_from(&ye);
        y
    }

    /// `dM/dq_j`.
    fn mass_partial(&self, q: &Vector, j: usize) -> Matrix {
        let h = fd_step(q[j]);
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[j] += h;
        qm[j] -= h;
        (self.mass(&qp) - self.mass(&qm)) / (2.0 * h)
    }

    /// `(dC/dq, dC/dqd)`.
    fn coriolis_jacobians(&self, q: &Vector, qd: &Vector) -> (Matrix, Matrix) {
        let dq = crate::integrate::finite_diff_jacobian(&|p: &Vector| self.coriolis(p, qd), q);
        let dqd = crate::integrate::finite_diff_jacobian(&|v: &Vector| self.coriolis(q, v), qd);
        (dq, dqd)
    }

    /// `dG/dq`.
    fn gravity_jacobian(&self, q: &Vector) -> Matrix {
        crate::integrate::finite_diff_jacobian(&|p: &Vector| self.gravity(p), q)
    }

    /// `dY/dq_j` of the full input map.
    fn full_input_map_partial(&self, q: &Vector, j: usize) -> Matrix {
        let h = fd_step(q[j]);
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[j] += h;
        qm[j] -= h;
        (self.full_input_map(&qp) - self.full_input_map(&qm)) / (2.0 * h)
    }
}

fn fd_step(x: f64) -> f64 {
    (1e-7 * x.abs()).max(1e-6)
}

/// Mechanical model plus impact: a scalar guard and an invertible jump map.
pub trait HybridSystem: MechanicalModel {
    /// Signed distance to the jump set, zero exactly on it and negative
    /// before the event.
    fn guard(&self, x: &Vector) -> f64;
    /// `x+ = Delta(x-)`.
    fn jump(&self, x_minus: &Vector) -> Result<Vector>;
    /// `x- = Delta^-1(x+)`. The default runs Newton's method on
    /// `Delta(x-) - x+ = 0` starting from `x+`.
    fn inverse_jump(&self, x_plus: &Vector) -> Result<Vector> {
        newton_inverse_jump(self, x_plus)
    }
    /// Total mechanical energy, when the model knows its potential.
    fn energy(&self, _x: &Vector) -> Option<f64> {
        None
    }
}

fn newton_inverse_jump<S: HybridSystem + ?Sized>(sys: &S, x_plus: &Vector) -> Result<Vector> {
    let mut x = x_plus.clone();
    for _ in 0..50 {
        let r = sys.jump(&x)? - x_plus;
        if linalg::inf_norm(&r) < 1e-13 * (1.0 + linalg::inf_norm(x_plus)) {
            return Ok(x);
        }
        let err = core::cell::RefCell::new(None);
        let jac = crate::integrate::finite_diff_jacobian(
            &|y: &Vector| match sys.jump(y) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    Vector::from_element(y.len(), f64::NAN)
                }
            },
            &x,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        let dx = linalg::lu_solve(&jac, &r).ok_or(Error::InverseJumpFailed)?;
        x -= dx;
    }
    Err(Error::InverseJumpFailed)
}

fn check_state<M: MechanicalModel + ?Sized>(model: &M, x: &Vector) -> Result<()> {
    if x.len() != 2 * model.dof() {
        return Err(Error::Dimension {
            what: "state",
            expected: 2 * model.dof(),
            found: x.len(),
        });
    }
    Ok(())
}

fn check_len(what: &'static str, v: &Vector, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Dimension {
            what,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// Splits a state into `(q, qd)`.
pub fn split_state(x: &Vector, dof: usize) -> (Vector, Vector) {
    (x.rows(0, dof).into_owned(), x.rows(dof, dof).into_owned())
}

/// Accelerations from `M qdd = Y_u u + Y_emb u_emb - C - G`. `u_emb = None`
/// leaves the embedding input out.
fn accelerations<M: MechanicalModel + ?Sized>(
    model: &M,
    x: &Vector,
    u: &Vector,
    u_emb: Option<&Vector>,
) -> Result<Vector> {
    check_state(model, x)?;
    check_len("input", u, model.n_act())?;
    let n = model.dof();
    let (q, qd) = split_state(x, n);
    let mut rhs = model.input_map(&q) * u - model.coriolis(&q, &qd) - model.gravity(&q);
    if let Some(w) = u_emb {
        check_len("embedding input", w, model.n_emb())?;
        rhs += model.embedding_map(&q) * w;
    }
    linalg::lu_solve(&model.mass(&q), &rhs).ok_or(Error::SingularMassMatrix)
}

fn assemble(qd: &Vector, qdd: &Vector) -> Vector {
    linalg::vstack(qd, qdd)
}

/// `f(x) + g(x) u` for the underactuated system.
pub fn continuous_dynamics<M: MechanicalModel + ?Sized>(
    model: &M,
    x: &Vector,
    u: &Vector,
) -> Result<Vector> {
    let qdd = accelerations(model, x, u, None)?;
    Ok(assemble(&x.rows(model.dof(), model.dof()).into_owned(), &qdd))
}

/// `f(x) + g(x) u + g_emb(x) u_emb` for the fully actuated embedding.
pub fn embedded_dynamics<M: MechanicalModel + ?Sized>(
    model: &M,
    x: &Vector,
    u: &Vector,
    u_emb: &Vector,
) -> Result<Vector> {
    let qdd = accelerations(model, x, u, Some(u_emb))?;
    Ok(assemble(&x.rows(model.dof(), model.dof()).into_owned(), &qdd))
}

/// Drift field `f(x)`.
pub fn drift<M: MechanicalModel + ?Sized>(model: &M, x: &Vector) -> Result<Vector> {
    continuous_dynamics(model, x, &Vector::zeros(model.n_act()))
}

/// Lifts a configuration-space input map `Y` into the state-space field `[0; M^-1 Y]`.
fn lifted_field<M: MechanicalModel + ?Sized>(model: &M, x: &Vector, y: Matrix) -> Result<Matrix> {
    check_state(model, x)?;
    let n = model.dof();
    let q = x.rows(0, n).into_owned();
    let top = linalg::lu_solve_matrix(&model.mass(&q), &y).ok_or(Error::SingularMassMatrix)?;
    let mut g = Matrix::zeros(2 * n, y.ncols());
    g.view_mut((n, 0), (n, y.ncols())).copy_from(&top);
    Ok(g)
}

/// Input field `g(x)`, `2 n_q x m`.
pub fn input_field<M: MechanicalModel + ?Sized>(model: &M, x: &Vector) -> Result<Matrix> {
    let q = x.rows(0, model.dof()).into_owned();
    lifted_field(model, x, model.input_map(&q))
}

/// Embedding field `g_emb(x)`, `2 n_q x (n_q - m)`.
pub fn embedding_field<M: MechanicalModel + ?Sized>(model: &M, x: &Vector) -> Result<Matrix> {
    let q = x.rows(0, model.dof()).into_owned();
    lifted_field(model, x, model.embedding_map(&q))
}

/// Result of evaluating the jump map.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOutcome {
    pub state: Vector,
    /// Guard value at the pre-impact state; nonzero means the jump was
    /// evaluated away from the jump set.
    pub guard_residual: f64,
}

impl JumpOutcome {
    pub fn on_guard(&self, tol: f64) -> bool {
        self.guard_residual.abs() <= tol
    }
}

/// `Delta(x-)`, reporting how far `x-` is from the jump set.
pub fn jump_map<S: HybridSystem + ?Sized>(sys: &S, x_minus: &Vector) -> Result<JumpOutcome> {
    check_state(sys, x_minus)?;
    Ok(JumpOutcome {
        state: sys.jump(x_minus)?,
        guard_residual: sys.guard(x_minus),
    })
}

/// `Delta^-1(x+)`.
pub fn inverse_jump_map<S: HybridSystem + ?Sized>(sys: &S, x_plus: &Vector) -> Result<Vector> {
    check_state(sys, x_plus)?;
    sys.inverse_jump(x_plus)
}

/// Signed guard value, zero on the jump set.
pub fn guard_distance<S: HybridSystem + ?Sized>(sys: &S, x: &Vector) -> f64 {
    sys.guard(x)
}

/// Flat control-affine interface `x' = F(x, u)` used by the integrators and
/// by the optimizer.
pub trait ControlSystem {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn dynamics(&self, x: &Vector, u: &Vector) -> Result<Vector>;

    /// `(dF/dx, dF/du)`; central differences unless overridden.
    fn jacobians(&self, x: &Vector, u: &Vector) -> Result<(Matrix, Matrix)> {
        fd_jacobians(self, x, u)
    }
}

/// Central-difference Jacobians of any [`ControlSystem`].
pub fn fd_jacobians<S: ControlSystem + ?Sized>(
    sys: &S,
    x: &Vector,
    u: &Vector,
) -> Result<(Matrix, Matrix)> {
    let n = sys.state_dim();
    let m = sys.input_dim();
    let mut a = Matrix::zeros(n, n);
    let mut b = Matrix::zeros(n, m);
    for j in 0..n {
        let h = fd_step(x[j]);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (sys.dynamics(&xp, u)? - sys.dynamics(&xm, u)?) / (2.0 * h);
        a.set_column(j, &col);
    }
    for j in 0..m {
        let h = fd_step(u[j]);
        let mut up = u.clone();
        let mut um = u.clone();
        up[j] += h;
        um[j] -= h;
        let col = (sys.dynamics(x, &up)? - sys.dynamics(x, &um)?) / (2.0 * h);
        b.set_column(j, &col);
    }
    Ok((a, b))
}

/// Jacobians of `x' = [qd; M^-1 (Y_cols w - C - G)]` built from the model
/// partials. `y_cols` selects which columns of the full input map `w` drives.
fn mechanical_jacobians<M: MechanicalModel + ?Sized>(
    model: &M,
    x: &Vector,
    w: &Vector,
    y_cols: core::ops::Range<usize>,
) -> Result<(Matrix, Matrix)> {
    let n = model.dof();
    let (q, qd) = split_state(x, n);
    let y_full = model.full_input_map(&q);
    let y = y_full.columns(y_cols.start, y_cols.len()).into_owned();
    let lu = model.mass(&q).lu();
    let rhs = &y * w - model.coriolis(&q, &qd) - model.gravity(&q);
    let qdd = lu.solve(&rhs).ok_or(Error::SingularMassMatrix)?;
    let (dc_dq, dc_dqd) = model.coriolis_jacobians(&q, &qd);
    let dg_dq = model.gravity_jacobian(&q);

    // d(rhs - M qdd)/dq_j with qdd held fixed, column by column.
    let mut dr_dq = -dc_dq - dg_dq;
    for j in 0..n {
        let dy = model.full_input_map_partial(&q, j);
        let dyw = dy.columns(y_cols.start, y_cols.len()) * w;
        let dm_qdd = model.mass_partial(&q, j) * &qdd;
        let mut col = dr_dq.column(j).into_owned();
        col += dyw - dm_qdd;
        dr_dq.set_column(j, &col);
    }
    let dqdd_dq = lu.solve(&dr_dq).ok_or(Error::SingularMassMatrix)?;
    let dqdd_dqd = lu.solve(&(-dc_dqd)).ok_or(Error::SingularMassMatrix)?;
    let dqdd_dw = lu.solve(&y).ok_or(Error::SingularMassMatrix)?;

    let mut a = Matrix::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).fill_with_identity();
    a.view_mut((n, 0), (n, n)).copy_from(&dqdd_dq);
    a.view_mut((n, n), (n, n)).copy_from(&dqdd_dqd);
    let mut b = Matrix::zeros(2 * n, y.ncols());
    b.view_mut((n, 0), (n, y.ncols())).copy_from(&dqdd_dw);
    Ok((a, b))
}

/// The underactuated system `x' = f(x) + g(x) u` as a [`ControlSystem`].
#[derive(Debug, Clone, Copy)]
pub struct Underactuated<'a, M: ?Sized>(pub &'a M);

impl<M: MechanicalModel + ?Sized> ControlSystem for Underactuated<'_, M> {
    fn state_dim(&self) -> usize {
        2 * self.0.dof()
    }
    fn input_dim(&self) -> usize {
        self.0.n_act()
    }
    fn dynamics(&self, x: &Vector, u: &Vector) -> Result<Vector> {
        continuous_dynamics(self.0, x, u)
    }
    fn jacobians(&self, x: &Vector, u: &Vector) -> Result<(Matrix, Matrix)> {
        check_state(self.0, x)?;
        check_len("input", u, self.0.n_act())?;
        mechanical_jacobians(self.0, x, u, 0..self.0.n_act())
    }
}

/// The fully actuated embedding with stacked input `[u; u_emb]`.
#[derive(Debug, Clone, Copy)]
pub struct Embedded<'a, M: ?Sized>(pub &'a M);

impl<M: MechanicalModel + ?Sized> ControlSystem for Embedded<'_, M> {
    fn state_dim(&self) -> usize {
        2 * self.0.dof()
    }
    fn input_dim(&self) -> usize {
        self.0.dof()
    }
    fn dynamics(&self, x: &Vector, ue: &Vector) -> Result<Vector> {
        check_len("embedded input", ue, self.0.dof())?;
        let m = self.0.n_act();
        let u = ue.rows(0, m).into_owned();
        let w = ue.rows(m, self.0.n_emb()).into_owned();
        embedded_dynamics(self.0, x, &u, &w)
    }
    fn jacobians(&self, x: &Vector, ue: &Vector) -> Result<(Matrix, Matrix)> {
        check_state(self.0, x)?;
        check_len("embedded input", ue, self.0.dof())?;
        mechanical_jacobians(self.0, x, ue, 0..self.0.dof())
    }
}

/// Full-actuation inverse dynamics `u^e = Y(q)^-1 (M qdd + C + G)`.
pub fn inverse_dynamics<M: MechanicalModel + ?Sized>(
    model: &M,
    q: &Vector,
    qd: &Vector,
    qdd: &Vector,
) -> Result<Vector> {
    let rhs = model.mass(q) * qdd + model.coriolis(q, qd) + model.gravity(q);
    linalg::lu_solve(&model.full_input_map(q), &rhs).ok_or(Error::SingularInputMap)
}

/// Rank check of `Y(q)` by its condition number.
pub fn input_map_invertible<M: MechanicalModel + ?Sized>(model: &M, q: &Vector, max_cond: f64) -> bool {
    linalg::condition_number(&model.full_input_map(q)) < max_cond
}

/// Splits embedded inputs `[u; u_emb]` into their parts.
pub fn split_embedded(ue: &Vector, n_act: usize) -> (Vector, Vector) {
    let p = ue.len() - n_act;
    (ue.rows(0, n_act).into_owned(), ue.rows(n_act, p).into_owned())
}

/// Collects a per-node property over a list of states.
pub fn guard_profile<S: HybridSystem + ?Sized>(sys: &S, states: &[Vector]) -> Vec<f64> {
    states.iter().map(|x| sys.guard(x)).collect()
}
