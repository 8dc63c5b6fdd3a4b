//! Per-component state scaling used for tolerances, norms and finite-difference steps.

use alloc::vec;
use serde::{Deserialize, Serialize};

use crate::{linalg, Vector};

/// Divides each state component by a characteristic magnitude so that mixed
/// units (rad, rad/s) can share one norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateScaling {
    scales: alloc::vec::Vec<f64>,
}

impl StateScaling {
    pub fn new(scales: alloc::vec::Vec<f64>) -> Self {
        debug_assert!(scales.iter().all(|s| *s > 0.0));
        Self { scales }
    }

    /// Identity scaling of dimension `n`.
    pub fn unit(n: usize) -> Self {
        Self::new(vec![1.0; n])
    }

    /// Mechanical state `[q; qdot]`: positions divided by `angle`, velocities by `rate`.
    pub fn mechanical(dof: usize, angle: f64, rate: f64) -> Self {
        let mut scales = vec![angle; dof];
        scales.extend(core::iter::repeat_n(rate, dof));
        Self::new(scales)
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn normalize(&self, v: &Vector) -> Vector {
        Vector::from_iterator(v.len(), v.iter().zip(&self.scales).map(|(x, s)| x / s))
    }

    pub fn denormalize(&self, v: &Vector) -> Vector {
        Vector::from_iterator(v.len(), v.iter().zip(&self.scales).map(|(x, s)| x * s))
    }

    /// Infinity norm of the scaled vector.
    pub fn inf_norm(&self, v: &Vector) -> f64 {
        linalg::inf_norm(&self.normalize(v))
    }
}
