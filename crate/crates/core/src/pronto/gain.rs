use alloc::vec::Vec;

use crate::integrate::TimeGrid;
use crate::linalg;
use crate::{Error, Matrix, Result};

const BLOWUP: f64 = 1e12;
const MAX_SUBSTEPS: usize = 1000;

/// Regulator weights for the projection gain. Independent of the tracking
/// cost so that the projection stays stable when the cost weights are tiny.
#[derive(Debug, Clone, PartialEq)]
pub struct GainWeights {
    pub q: Matrix,
    pub r: Matrix,
    pub q_final: Matrix,
}

impl GainWeights {
    /// `Q = q I`, `R = r I`, `Q_f = q_f I`.
    pub fn scaled(n: usize, m: usize, q: f64, r: f64, q_final: f64) -> Self {
        Self {
            q: Matrix::identity(n, n) * q,
            r: Matrix::identity(m, m) * r,
            q_final: Matrix::identity(n, n) * q_final,
        }
    }

    /// `Q = I`, `R = I`, `Q_f = 10 I`.
    pub fn default_for(n: usize, m: usize) -> Self {
        Self::scaled(n, m, 1.0, 1.0, 10.0)
    }
}

/// Time-varying gain `K_k` (m x n) at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackGain {
    pub gains: Vec<Matrix>,
}

impl FeedbackGain {
    pub fn zeros(nodes: usize, m: usize, n: usize) -> Self {
        Self {
            gains: alloc::vec![Matrix::zeros(m, n); nodes],
        }
    }
}

fn riccati_rhs(a: &Matrix, b: &Matrix, r_inv: &Matrix, q: &Matrix, p: &Matrix) -> Matrix {
    // dP/dtau with tau = T - t.
    let pb = p * b;
    a.transpose() * p + p * a - &pb * r_inv * pb.transpose() + q
}

/// Integrates `-P' = A'P + PA - P B R^-1 B'P + Q`, `P(T) = Q_f` backward with
/// RK4 on the grid, subdividing intervals where the local stiffness needs it.
/// `lin[k] = (A(t_k), B(t_k))`; midpoints use the average of the neighbours.
pub fn solve_riccati(lin: &[(Matrix, Matrix)], grid: &TimeGrid, w: &GainWeights) -> Result<Vec<Matrix>> {
    let nodes = grid.nodes();
    if lin.len() != nodes {
        return Err(Error::Dimension {
            what: "linearization nodes",
            expected: nodes,
            found: lin.len(),
        });
    }
    let r_inv = w
        .r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("gain weight R is not positive definite".into()))?
        .inverse();
    let h = grid.step();
    let mut ps = alloc::vec![Matrix::zeros(0, 0); nodes];
    let mut p = w.q_final.clone();
    ps[nodes - 1] = p.clone();
    for k in (0..nodes - 1).rev() {
        let (a1, b1) = &lin[k + 1];
        let (a0, b0) = &lin[k];
        let stiff = h * (2.0 * a0.norm().max(a1.norm()) + (b0 * &r_inv * b0.transpose()).norm() * p.norm());
        let sub = (libm::ceil(stiff / 0.5) as usize).clamp(1, MAX_SUBSTEPS);
        let dt = h / sub as f64;
        for s in 0..sub {
            // Fraction of the way from t_{k+1} back to t_k.
            let lerp = |f: f64| {
                let f = (s as f64 + f) / sub as f64;
                (a1 * (1.0 - f) + a0 * f, b1 * (1.0 - f) + b0 * f)
            };
            let (aa, ba) = lerp(0.0);
            let (am, bm) = lerp(0.5);
            let (ae, be) = lerp(1.0);
            let k1 = riccati_rhs(&aa, &ba, &r_inv, &w.q, &p);
            let k2 = riccati_rhs(&am, &bm, &r_inv, &w.q, &(&p + &k1 * (0.5 * dt)));
            let k3 = riccati_rhs(&am, &bm, &r_inv, &w.q, &(&p + &k2 * (0.5 * dt)));
            let k4 = riccati_rhs(&ae, &be, &r_inv, &w.q, &(&p + &k3 * dt));
            p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            linalg::symmetrize(&mut p);
        }
        let norm = p.norm();
        if !(norm <= BLOWUP) {
            return Err(Error::RiccatiBlowup { node: k, norm });
        }
        ps[k] = p.clone();
    }
    Ok(ps)
}

/// Projection gain `K(t) = R^-1 B(t)' P(t)` from the regulator Riccati
/// equation along the linearization.
pub fn design_gain(lin: &[(Matrix, Matrix)], grid: &TimeGrid, w: &GainWeights) -> Result<FeedbackGain> {
    let ps = solve_riccati(lin, grid, w)?;
    let chol = w
        .r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("gain weight R is not positive definite".into()))?;
    let gains = lin
        .iter()
        .zip(&ps)
        .map(|((_, b), p)| chol.solve(&(b.transpose() * p)))
        .collect();
    Ok(FeedbackGain { gains })
}
