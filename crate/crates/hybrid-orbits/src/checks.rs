//! Model invariants evaluated at run time (`check-model`).

use std::f64::consts::PI;

use hybrid_orbits_core::biped::{biped_mass_matrix, biped_potential, reference_initial_state, Biped};
use hybrid_orbits_core::dynamics::{HybridSystem, MechanicalModel, Underactuated};
use hybrid_orbits_core::integrate::{finite_diff_jacobian, simulate, TimeGrid};
use hybrid_orbits_core::orbit::Check;
use hybrid_orbits_core::{linalg, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed;
const SAMPLES: usize = 1000;

fn check(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        value,
        threshold,
        passed: value < threshold,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn rel_mat(a: &Matrix, b: &Matrix) -> f64 {
    linalg::max_abs(&(a - b)) / (1.0 + linalg::max_abs(b))
}

fn random_state(rng: &mut ChaCha8Rng) -> (Vector, Vector) {
    let q = Vector::from_fn(3, |_, _| rng.random_range(-PI..PI));
    let qd = Vector::from_fn(3, |_, _| rng.random_range(-5.0..5.0));
    (q, qd)
}

fn guard_state(rng: &mut ChaCha8Rng, theta1_jmp: f64) -> Vector {
    let th = Vector::from_vec(vec![theta1_jmp, rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8)]);
    let thd = Vector::from_fn(3, |_, _| rng.random_range(-4.0..4.0));
    linalg::vstack(&th, &thd)
}

/// Runs every invariant on `sys` with a fixed seed.
pub fn model_checks(sys: &Biped) -> Vec<Check> {
    let p = sys.params;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();

    if p == Default::default() {
        let m0 = biped_mass_matrix(&p, &Vector::zeros(3));
        let fixture = Matrix::from_row_slice(3, 3, &[31.25, -2.5, 5.0, -2.5, 1.25, 0.0, 5.0, 0.0, 2.5]);
        out.push(check("mass-fixture", linalg::max_abs(&(m0 - fixture)), 1e-12));
    }

    let (mut spd, mut sym, mut power, mut grav, mut jac) = (f64::INFINITY, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut y_cond = 0.0_f64;
    for _ in 0..SAMPLES {
        let (q, qd) = random_state(&mut rng);
        let m = sys.mass(&q);
        sym = sym.max(linalg::max_abs(&(&m - m.transpose())));
        spd = spd.min(m.clone().symmetric_eigen().eigenvalues.min());

        // qd' C = 1/2 qd' Mdot qd: the Coriolis forces do no net work.
        let mdot = (0..3).fold(Matrix::zeros(3, 3), |acc, j| acc + sys.mass_partial(&q, j) * qd[j]);
        let lhs = qd.dot(&sys.coriolis(&q, &qd));
        let rhs = 0.5 * qd.dot(&(&mdot * &qd));
        power = power.max(rel(lhs, rhs));

        let h = 1e-6;
        let fd_grad = Vector::from_fn(3, |i, _| {
            let mut a = q.clone();
            let mut b = q.clone();
            a[i] += h;
            b[i] -= h;
            (biped_potential(&p, &a) - biped_potential(&p, &b)) / (2.0 * h)
        });
        grav = grav.max(linalg::inf_norm(&(sys.gravity(&q) - &fd_grad)) / (1.0 + linalg::inf_norm(&fd_grad)));

        let (cq, cqd) = sys.coriolis_jacobians(&q, &qd);
        let fd_cq = finite_diff_jacobian(&|x: &Vector| sys.coriolis(x, &qd), &q);
        let fd_cqd = finite_diff_jacobian(&|v: &Vector| sys.coriolis(&q, v), &qd);
        let fd_g = finite_diff_jacobian(&|x: &Vector| sys.gravity(x), &q);
        jac = jac
            .max(rel_mat(&cq, &fd_cq))
            .max(rel_mat(&cqd, &fd_cqd))
            .max(rel_mat(&sys.gravity_jacobian(&q), &fd_g));

        y_cond = y_cond.max(linalg::condition_number(&sys.full_input_map(&q)));
    }
    out.push(check("mass-symmetric", sym, 1e-12));
    out.push(check("mass-positive-definite", -spd, 0.0));
    out.push(check("coriolis-power", power, 1e-10));
    out.push(check("gravity-gradient", grav, 1e-6));
    out.push(check("jacobians", jac, 1e-5));
    out.push(check("embedding-input-map-cond", y_cond, 1e8));

    let grid = TimeGrid::new(1.53, 2000).expect("grid");
    let x0 = reference_initial_state();
    let drift = match simulate(&Underactuated(sys), &x0, &vec![Vector::zeros(2); grid.nodes()], &grid) {
        Ok(traj) => {
            let e0 = sys.energy(&x0).unwrap_or(f64::NAN);
            traj.states
                .iter()
                .map(|x| (sys.energy(x).unwrap_or(f64::NAN) - e0).abs() / e0.abs())
                .fold(0.0, f64::max)
        }
        Err(_) => f64::INFINITY,
    };
    out.push(check("energy-conservation", drift, 1e-6));

    let (mut roundtrip, mut gain) = (0.0_f64, f64::NEG_INFINITY);
    for _ in 0..100 {
        let x = guard_state(&mut rng, p.theta1_jmp);
        let err = match (sys.jump(&x), sys.inverse_jump(&x)) {
            (Ok(xp), Ok(xm)) => {
                gain = gain.max(sys.kinetic_energy(&xp) - sys.kinetic_energy(&x));
                let back = sys.inverse_jump(&xp).map(|b| linalg::inf_norm(&(b - &x)));
                let fwd = sys.jump(&xm).map(|f| linalg::inf_norm(&(f - &x)));
                match (back, fwd) {
                    (Ok(a), Ok(b)) => a.max(b) / (1.0 + linalg::inf_norm(&x)),
                    _ => f64::INFINITY,
                }
            }
            _ => f64::INFINITY,
        };
        roundtrip = roundtrip.max(err);
    }
    out.push(check("jump-roundtrip", roundtrip, 1e-10));
    out.push(check("impact-kinetic-energy-gain", gain, 1e-9));

    if p == Default::default() {
        let angles = sys
            .inverse_jump(&x0)
            .map(|xf| {
                xf.iter()
                    .take(3)
                    .zip([22.5, -22.5, 20.0])
                    .map(|(a, b)| (a.to_degrees() - b).abs())
                    .fold(0.0, f64::max)
            })
            .unwrap_or(f64::INFINITY);
        out.push(check("final-state-angles-deg", angles, 1e-9));
    }
    out
}
