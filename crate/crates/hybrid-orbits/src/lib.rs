//! Configuration, runs, file formats and model checks around
//! `hybrid_orbits_core`.
//!
//! The `hybrid-orbits` binary exposes three commands: `design` runs the
//! orbit design strategy from a configuration and writes a run directory,
//! `verify` checks a stored trajectory, and `check-model` evaluates the
//! biped model invariants.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod plot;
pub mod run;
pub mod trajectory;

pub use config::{load_config, parse_config, ConfigError, RunConfig, Scenario};
pub use run::{run_design, ExitStatus, RunOptions, RunOutcome};
pub use trajectory::{export_trajectory, parse_trajectory, CsvError};
