//! Periodic orbit design for underactuated mechanical systems with impacts.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only numerics:
//!
//! * [`dynamics`]: mechanical models in second-order and state-space form,
//!   the fully actuated embedding, guard and jump maps.
//! * [`biped`]: the three-link compass biped with torso.
//! * [`integrate`]: time grids, curves, fixed-step RK4 and linearization.
//! * [`pronto`]: the projection-operator Newton method for trajectory
//!   optimization (feedback projection, LQ descent, backtracking).
//! * [`orbit`]: the three-step design strategy (desired curve, embedding
//!   continuation, terminal-state enforcement by penalty continuation and
//!   Newton root finding on the target state) and orbit verification.
//!
//! File formats, configuration and the command line live in the
//! `hybrid-orbits` crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x < y)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod biped;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod orbit;
pub mod pronto;
pub mod scaling;

pub use error::{Error, Result};

/// Dense column vector used for states and inputs.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
