//! Acceptance suite: one pass/fail line per criterion, exit status 1 if any
//! fails. Criteria 6 to 8 run both gait presets end to end (a few minutes).

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hybrid_orbits::config::{parse_config, GAIT1, GAIT2};
use hybrid_orbits::run::{run_design, RunOptions, RunOutcome};
use hybrid_orbits_core::biped::{
    biped_coriolis, biped_gravity, biped_mass_matrix, biped_potential, reference_initial_state, Biped, BipedParams,
};
use hybrid_orbits_core::dynamics::{HybridSystem, Underactuated};
use hybrid_orbits_core::integrate::{defect, linearize, simulate, JacobianMethod, TimeGrid};
use hybrid_orbits_core::orbit::{Phase, StrategyTrace};
use hybrid_orbits_core::pronto::{
    design_gain, eval_cost, project, pronto_solve, CostGradient, CostSpec, GainWeights, NoInterrupt, ProntoOptions,
};
use hybrid_orbits_core::{linalg, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::biped as oracle;
use support::{batch_lq_optimum, lq_spec, oscillator, random_curve, random_tangent, sine_desired, zero_input_trajectory, Pendulum};

/// One-step accuracy the integrator is held to in the projection checks.
const INTEGRATOR_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;

fn relm(a: &Matrix, b: &Matrix) -> f64 {
    linalg::max_abs(&(a - b)) / linalg::max_abs(b).max(1.0)
}

fn relv(a: &Vector, b: &Vector) -> f64 {
    linalg::inf_norm(&(a - b)) / linalg::inf_norm(b).max(1.0)
}

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn model_transcription() -> Outcome {
    let p = BipedParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let th = Vector::from_fn(3, |_, _| rng.random_range(-PI..PI));
        let thd = Vector::from_fn(3, |_, _| rng.random_range(-5.0..5.0));
        worst = worst
            .max(relm(&biped_mass_matrix(&p, &th), &oracle::mass(&p, &th)))
            .max(relv(&biped_coriolis(&p, &th, &thd), &oracle::coriolis(&p, &th, &thd)))
            .max(relv(&biped_gravity(&p, &th), &oracle::gravity(&p, &th)))
            .max((biped_potential(&p, &th) - oracle::potential(&p, &th)).abs());
    }
    let m0 = biped_mass_matrix(&p, &Vector::zeros(3));
    let fixture = Matrix::from_row_slice(3, 3, &[31.25, -2.5, 5.0, -2.5, 1.25, 0.0, 5.0, 0.0, 2.5]);
    let fix = linalg::max_abs(&(m0 - fixture));
    require(
        worst < 1e-10 && fix < 1e-12,
        format!("max relative mismatch {worst:.2e} (< 1e-10), M(0) error {fix:.1e} (< 1e-12)"),
    )
}

fn conservation() -> Outcome {
    let sys = Biped::default();
    let grid = TimeGrid::new(1.53, 2000).unwrap();
    let x0 = reference_initial_state();
    let traj = simulate(&Underactuated(&sys), &x0, &vec![Vector::zeros(2); grid.nodes()], &grid)
        .map_err(|e| e.to_string())?;
    let e0 = oracle::energy(&sys.params, &x0);
    let drift = traj
        .states
        .iter()
        .map(|x| (oracle::energy(&sys.params, x) - e0).abs() / e0.abs())
        .fold(0.0, f64::max);
    require(drift < 1e-6, format!("relative energy drift {drift:.2e} (< 1e-6)"))
}

fn jump_roundtrip() -> Outcome {
    let sys = Biped::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let th = Vector::from_vec(vec![PI / 8.0, rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)]);
        let thd = Vector::from_fn(3, |_, _| rng.random_range(-4.0..4.0));
        let x = linalg::vstack(&th, &thd);
        let back = sys.inverse_jump(&sys.jump(&x).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let fwd = sys.jump(&sys.inverse_jump(&x).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        worst = worst.max(relv(&back, &x)).max(relv(&fwd, &x));
    }
    let xf = sys.inverse_jump(&reference_initial_state()).map_err(|e| e.to_string())?;
    let deg: Vec<f64> = xf.iter().take(3).map(|v| v.to_degrees()).collect();
    let angle_err = deg.iter().zip([22.5, -22.5, 20.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    require(
        worst < 1e-10 && angle_err < 1e-9,
        format!("roundtrip error {worst:.2e} (< 1e-10), x_f angles {deg:.6?} deg"),
    )
}

fn optimizer_oracle() -> Outcome {
    let sys = oscillator();
    let grid = TimeGrid::new(2.0, 200).unwrap();
    let x0 = Vector::from_vec(vec![1.0, 0.0]);
    let spec = lq_spec(grid, 3.0);
    let xi0 = zero_input_trajectory(&sys, &x0, grid);
    let sol = pronto_solve(&sys, &spec, &xi0, &ProntoOptions::default(), &NoInterrupt).map_err(|e| e.to_string())?;
    let oracle_u = batch_lq_optimum(&sys, &spec, &x0);
    let lq_err = oracle_u
        .iter()
        .zip(&sol.trajectory.inputs)
        .map(|(a, b)| linalg::inf_norm(&(a - b)))
        .fold(0.0, f64::max);

    let sys = Pendulum;
    let grid = TimeGrid::new(3.0, 300).unwrap();
    let x0 = Vector::from_vec(vec![0.2, 0.0]);
    let spec = CostSpec::new(
        Matrix::identity(2, 2),
        Matrix::from_element(1, 1, 0.5),
        0.0,
        0,
        2.0,
        Vector::from_vec(vec![PI, 0.0]),
        sine_desired(grid),
    )
    .map_err(|e| e.to_string())?;
    let inputs: Vec<Vector> = grid.times().map(|t| Vector::from_element(1, (1.3 * t).cos())).collect();
    let traj = simulate(&sys, &x0, &inputs, &grid).map_err(|e| e.to_string())?;
    let cont = linearize(&sys, &traj, JacobianMethod::Model).map_err(|e| e.to_string())?;
    let gain = design_gain(&cont, &grid, &GainWeights::default_for(2, 1)).map_err(|e| e.to_string())?;
    let g0 = eval_cost(&spec, &traj).map_err(|e| e.to_string())?;
    let grad = CostGradient::new(&spec, &traj).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut first_order = true;
    let mut worst_ratio = 0.0_f64;
    for _ in 0..10 {
        let (z, v) = random_tangent(&sys, &traj, &mut rng);
        let slope = grad.apply(&z, &v);
        let errs: Vec<f64> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&eps| {
                let eta = project(&sys, &x0, &traj.axpy(eps, &z, &v), &gain, 1e3).unwrap();
                ((eval_cost(&spec, &eta).unwrap() - g0) / eps - slope).abs()
            })
            .collect();
        let floor = 1e-9 * (1.0 + slope.abs());
        first_order &= errs[2] < 1e-3 * (1.0 + slope.abs())
            && errs[1] < 0.2 * errs[0] + floor
            && errs[2] < 0.2 * errs[1] + floor;
        worst_ratio = worst_ratio.max(errs[2] / errs[1].max(f64::MIN_POSITIVE));
    }
    let iters = sol.iterations();
    require(
        lq_err < 1e-6 && iters <= 2 && first_order,
        format!(
            "LQ optimum error {lq_err:.1e} in {iters} iterations; FD gradient error shrinks with eps in 10 directions (worst ratio {worst_ratio:.3})"
        ),
    )
}

fn projection_properties() -> Outcome {
    let sys = Pendulum;
    let grid = TimeGrid::new(2.0, 400).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut fixed, mut idem) = (0.0_f64, 0.0_f64);
    let diff = |a: &hybrid_orbits_core::integrate::Curve, b: &hybrid_orbits_core::integrate::Curve| {
        a.states
            .iter()
            .zip(&b.states)
            .chain(a.inputs.iter().zip(&b.inputs))
            .map(|(x, y)| linalg::inf_norm(&(x - y)))
            .fold(0.0, f64::max)
    };
    for _ in 0..20 {
        let xi = random_curve(grid, &mut rng);
        let x0 = xi.initial_state().clone();
        let cont = linearize(&sys, &xi, JacobianMethod::Model).map_err(|e| e.to_string())?;
        let gain = design_gain(&cont, &grid, &GainWeights::default_for(2, 1)).map_err(|e| e.to_string())?;
        let eta = project(&sys, &x0, &xi, &gain, 1e3).map_err(|e| e.to_string())?;
        let eta2 = project(&sys, &x0, &eta, &gain, 1e3).map_err(|e| e.to_string())?;
        idem = idem.max(diff(&eta, &eta2));

        let traj = simulate(&sys, &x0, &xi.inputs, &grid).map_err(|e| e.to_string())?;
        let p = project(&sys, &x0, &traj, &gain, 1e3).map_err(|e| e.to_string())?;
        fixed = fixed.max(diff(&traj, &p)).max(defect(&sys, &eta).unwrap_or(f64::INFINITY));
    }
    let tol = 2.0 * INTEGRATOR_TOL;
    require(
        fixed < tol && idem < tol,
        format!("|P(xi) - xi| {fixed:.1e}, |P(P(xi)) - P(xi)| {idem:.1e} (< {tol:.0e})"),
    )
}

fn gait(source: &str, name: &str) -> Result<RunOutcome, String> {
    let cfg = parse_config(source, name).map_err(|e| e.to_string())?;
    let dir = std::env::temp_dir().join(format!("hybrid-orbits-acceptance-{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    Ok(run_design(
        &cfg,
        &RunOptions {
            out: Some(dir),
            max_duration: None,
        },
    ))
}

fn gait1(out: &Result<RunOutcome, String>) -> Outcome {
    let out = out.as_ref().map_err(Clone::clone)?;
    let r = &out.report;
    if let Some(e) = &r.error {
        return Err(format!("failed in {}: {}", e.phase, e.message));
    }
    let s = &r.summary;
    let u_emb = s.u_emb_norm.unwrap_or(f64::INFINITY);
    let err = s.terminal_error.unwrap_or(f64::INFINITY);
    let peak = s.max_abs_u2_final_tenth.unwrap_or(0.0);
    let verified = r.verification.as_ref().is_some_and(|v| v.passed);
    require(
        u_emb < 1e-2 && err < 1e-3 && verified && peak > 90.0 && s.runtime_s < 600.0,
        format!(
            "|u_emb| {u_emb:.2e}, terminal error {err:.2e}, verified {verified}, max |u2| final 10% {peak:.1} N m (> 90), {:.0} s",
            s.runtime_s
        ),
    )
}

fn gait2(out: &Result<RunOutcome, String>) -> Outcome {
    let out = out.as_ref().map_err(Clone::clone)?;
    let r = &out.report;
    if let Some(e) = &r.error {
        return Err(format!("failed in {}: {}", e.phase, e.message));
    }
    let s = &r.summary;
    let u2 = s.u2_final.map(f64::abs).unwrap_or(f64::INFINITY);
    let emb = s.embedding_terminal_error.unwrap_or(0.0);
    let fin = s.terminal_error.unwrap_or(f64::INFINITY);
    let verified = r.verification.as_ref().is_some_and(|v| v.passed);
    require(
        verified && u2 < 10.0 && emb > 1e-3 && fin < 1e-3 && s.runtime_s < 600.0,
        format!(
            "verified {verified}, |u2(T)| {u2:.2} N m (< 10), embedding terminal error {emb:.2e} (> 1e-3), final {fin:.2e} (< 1e-3), {:.0} s",
            s.runtime_s
        ),
    )
}

/// The target changes only after an accepted iterate with terminal error
/// within `delta`; rejected trials are re-based on that iterate; `rho_f`
/// never decreases.
fn branch_rule(trace: &StrategyTrace, delta: f64) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let step3: Vec<_> = trace.records.iter().filter(|r| r.phase != Phase::Embedding).collect();
    let mut base_error = None;
    let mut changes = 0;
    for w in step3.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.phase != Phase::TargetBacktrack {
            base_error = Some(a.terminal_error);
        }
        if b.rho_f < a.rho_f {
            bad.push(format!("rho_f decreased at step {}", b.step));
        }
        if a.x_target != b.x_target {
            changes += 1;
            match base_error {
                Some(e) if e <= delta => {}
                e => bad.push(format!("target changed at step {} from error {e:?}", b.step)),
            }
        }
    }
    (changes, bad)
}

fn branch_fidelity(runs: &[(&str, &Result<RunOutcome, String>)]) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, run) in runs {
        let Ok(out) = run else {
            return Err(format!("{name}: no trace"));
        };
        let (changes, bad) = branch_rule(&out.trace, 5e-2);
        let lib = out.trace.branch_violations(5e-2);
        ok &= bad.is_empty() && lib.is_empty() && !out.trace.records.is_empty();
        parts.push(format!("{name}: {} records, {changes} target updates, {} violations", out.trace.records.len(), bad.len() + lib.len()));
        for v in bad.iter().chain(&lib) {
            parts.push(v.clone());
        }
    }
    require(ok, parts.join("; "))
}

fn report(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let dt = start.elapsed();
    let in_time = dt <= budget;
    let (pass, detail) = match out {
        Ok(d) => (in_time, d),
        Err(d) => (false, d),
    };
    println!(
        "[{}] {id}. {name}: {detail} [{:.2} s, budget {} s{}]",
        if pass { "PASS" } else { "FAIL" },
        dt.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", over budget" }
    );
    pass
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let mut all = true;
    all &= report(1, "model transcription", s(1), model_transcription);
    all &= report(2, "energy conservation", s(1), conservation);
    all &= report(3, "jump-map roundtrip", s(1), jump_roundtrip);
    all &= report(4, "optimizer oracle", s(10), optimizer_oracle);
    all &= report(5, "projection properties", s(10), projection_properties);
    let mut g1 = Err("not run".to_string());
    all &= report(6, "gait 1 end to end", s(600), || {
        g1 = gait(GAIT1, "gait1");
        gait1(&g1)
    });
    let mut g2 = Err("not run".to_string());
    all &= report(7, "gait 2 end to end", s(600), || {
        g2 = gait(GAIT2, "gait2");
        gait2(&g2)
    });
    all &= report(8, "branch fidelity", s(1), || branch_fidelity(&[("gait1", &g1), ("gait2", &g2)]));
    if all {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
