use alloc::string::String;
use alloc::vec::Vec;

use crate::dynamics::{HybridSystem, Underactuated};
use crate::integrate::{defect, finite_diff_jacobian, Curve};
use crate::linalg;
use crate::scaling::StateScaling;
use crate::{Result, Vector};

/// Thresholds of [`verify_periodic_orbit`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VerifyTolerances {
    /// Terminal error, normalized inf-norm.
    pub eps_f_tol: f64,
    /// `|x(0) - x0|_inf`; zero up to the precision the curve was stored with.
    pub initial_tol: f64,
    pub defect_tol: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            eps_f_tol: 1e-3,
            initial_tol: 1e-9,
            defect_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    /// Guard value at the final node (zero on the jump set).
    pub final_guard: f64,
    pub passed: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        value,
        threshold,
        passed: value < threshold,
    }
}

/// Checks that `curve` closes a one-jump periodic orbit through `x0`:
///
/// * `initial-state`: `|x(0) - x0|_inf`;
/// * `terminal-state`: `|x(T) - x_f|` (normalized inf-norm) below `eps_f_tol`;
/// * `jump-closure`: `|Delta(x(T)) - x0|` (normalized) below `eps_f_tol`
///   times the normalized inf-norm of `D Delta(x_f)` (at least 1), the
///   amplification the jump applies to a terminal error;
/// * `guard-interior`: the largest guard value over nodes `0..N-1`, which
///   must stay negative;
/// * `defect`: the trajectory defect on the underactuated system.
pub fn verify_periodic_orbit<S: HybridSystem + ?Sized>(
    sys: &S,
    x0: &Vector,
    xf: &Vector,
    curve: &Curve,
    scaling: &StateScaling,
    tol: &VerifyTolerances,
) -> Result<VerificationReport> {
    curve.validate()?;
    let mut checks = Vec::new();
    checks.push(check(
        "initial-state",
        linalg::inf_norm(&(curve.initial_state() - x0)),
        tol.initial_tol,
    ));
    let xt = curve.final_state();
    checks.push(check("terminal-state", scaling.inf_norm(&(xt - xf)), tol.eps_f_tol));

    let jac = finite_diff_jacobian(&|x: &Vector| sys.jump(x).unwrap_or_else(|_| x * f64::NAN), xf);
    let s = scaling.scales();
    let amplification = (0..jac.nrows())
        .map(|i| (0..jac.ncols()).map(|j| libm::fabs(jac[(i, j)] * s[j] / s[i])).sum::<f64>())
        .fold(1.0_f64, f64::max);
    let closure = match sys.jump(xt) {
        Ok(xp) => scaling.inf_norm(&(xp - x0)),
        Err(_) => f64::INFINITY,
    };
    let mut c = check("jump-closure", closure, tol.eps_f_tol * amplification);
    if !amplification.is_finite() {
        c.passed = false;
    }
    checks.push(c);

    let n_int = curve.grid.intervals();
    let interior = curve.states[..n_int]
        .iter()
        .map(|x| sys.guard(x))
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(check("guard-interior", interior, 0.0));

    let d = defect(&Underactuated(sys), curve).unwrap_or(f64::INFINITY);
    checks.push(check("defect", d, tol.defect_tol));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        checks,
        final_guard: sys.guard(xt),
        passed,
    })
}
