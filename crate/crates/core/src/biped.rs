//! Three-link planar compass biped with torso.
//!
//! Coordinates are absolute link angles `theta = [theta1, theta2, theta3]`
//! (stance leg, swing leg, torso) measured from the vertical. Each leg carries
//! a point mass `m` at mid length, the hip a mass `M_H` and the torso a mass
//! `M_T` at distance `l` from the hip. Torques `u1` (stance leg / torso) and
//! `u2` (swing leg / torso) enter as `U = [-u1, -u2, u1 + u2]`; the embedding
//! adds a torque acting on the torso coordinate only.
//!
//! At impact the legs swap roles (`theta+ = R theta-`) and the velocities
//! jump through `thetadot+ = A(theta-) thetadot-`.

use libm::{cos, sin};
use serde::{Deserialize, Serialize};

use crate::dynamics::{HybridSystem, MechanicalModel};
use crate::{linalg, Error, Matrix, Result, Vector};

/// Largest admissible condition number of the impact matrix when inverting the jump.
pub const MAX_IMPACT_COND: f64 = 1e8;
/// Smallest admissible `|den|` in the impact matrix.
pub const MIN_IMPACT_DEN: f64 = 1e-12;

/// Physical parameters. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipedParams {
    /// Leg mass (kg).
    pub m: f64,
    /// Hip mass (kg).
    pub m_hip: f64,
    /// Torso mass (kg).
    pub m_torso: f64,
    /// Leg length (m).
    pub r: f64,
    /// Hip-to-torso-mass distance (m).
    pub l: f64,
    /// Gravitational acceleration (m/s^2).
    pub g: f64,
    /// Stance-leg angle at which the swing foot strikes (rad).
    pub theta1_jmp: f64,
}

impl Default for BipedParams {
    fn default() -> Self {
        Self {
            m: 5.0,
            m_hip: 15.0,
            m_torso: 10.0,
            r: 1.0,
            l: 0.5,
            g: 9.81,
            theta1_jmp: core::f64::consts::PI / 8.0,
        }
    }
}

impl BipedParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("M_H", self.m_hip),
            ("M_T", self.m_torso),
            ("r", self.r),
            ("l", self.l),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        if !self.g.is_finite() || !self.theta1_jmp.is_finite() {
            return Err(Error::InvalidParameter("g and theta1_jmp must be finite".into()));
        }
        Ok(())
    }
}

fn theta3(theta: &Vector) -> (f64, f64, f64) {
    debug_assert_eq!(theta.len(), 3);
    (theta[0], theta[1], theta[2])
}

/// `M(theta)`.
pub fn biped_mass_matrix(p: &BipedParams, theta: &Vector) -> Matrix {
    let (t1, t2, t3) = theta3(theta);
    let c12 = cos(t1 - t2);
    let c13 = cos(t1 - t3);
    let r2 = p.r * p.r;
    let m12 = -0.5 * p.m * r2 * c12;
    let m13 = p.m_torso * p.r * p.l * c13;
    Matrix::from_row_slice(
        3,
        3,
        &[
            (1.25 * p.m + p.m_hip + p.m_torso) * r2,
            m12,
            m13,
            m12,
            0.25 * p.m * r2,
            0.0,
            m13,
            0.0,
            p.m_torso * p.l * p.l,
        ],
    )
}

/// `C(theta, thetadot)`.
pub fn biped_coriolis(p: &BipedParams, theta: &Vector, thetadot: &Vector) -> Vector {
    let (t1, t2, t3) = theta3(theta);
    let (w1, w2, w3) = theta3(thetadot);
    let s12 = sin(t1 - t2);
    let s13 = sin(t1 - t3);
    let a = 0.5 * p.m * p.r * p.r;
    let b = p.m_torso * p.r * p.l;
    Vector::from_column_slice(&[
        -a * s12 * w2 * w2 + b * s13 * w3 * w3,
        a * s12 * w1 * w1,
        -b * s13 * w1 * w1,
    ])
}

/// `G(theta)`.
pub fn biped_gravity(p: &BipedParams, theta: &Vector) -> Vector {
    let (t1, t2, t3) = theta3(theta);
    Vector::from_column_slice(&[
        -0.5 * p.g * (2.0 * p.m_hip + 3.0 * p.m + 2.0 * p.m_torso) * p.r * sin(t1),
        0.5 * p.g * p.m * p.r * sin(t2),
        -p.g * p.m_torso * p.l * sin(t3),
    ])
}

/// Potential energy whose gradient is [`biped_gravity`].
pub fn biped_potential(p: &BipedParams, theta: &Vector) -> f64 {
    let (t1, t2, t3) = theta3(theta);
    p.g * p.r * cos(t1) * (1.5 * p.m + p.m_hip + p.m_torso) - 0.5 * p.g * p.m * p.r * cos(t2)
        + p.g * p.m_torso * p.l * cos(t3)
}

/// Torque maps of the biped.
#[derive(Debug, Clone, PartialEq)]
pub struct TorqueMaps {
    /// `3 x 2` actuated map.
    pub y_u: Matrix,
    /// `3 x 1` embedding map (torso coordinate only).
    pub y_emb: Matrix,
    /// `[y_u y_emb]`.
    pub y: Matrix,
}

/// Constant torque maps `Y_u`, `Y_emb` and `Y`.
pub fn biped_torque_maps(_p: &BipedParams) -> TorqueMaps {
    let y = Matrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 1.0, 1.0]);
    TorqueMaps {
        y_u: y.columns(0, 2).into_owned(),
        y_emb: y.columns(2, 1).into_owned(),
        y,
    }
}

/// Denominator shared by the impact matrix entries.
pub fn impact_denominator(p: &BipedParams, theta_minus: &Vector) -> f64 {
    let (t1, t2, t3) = theta3(theta_minus);
    -3.0 * p.m - 4.0 * p.m_hip - 2.0 * p.m_torso
        + 2.0 * p.m * cos(2.0 * t1 - 2.0 * t2)
        + 2.0 * p.m_torso * cos(-2.0 * t2 + 2.0 * t3)
}

/// Velocity jump matrix `A(theta-)` with `thetadot+ = A(theta-) thetadot-`.
pub fn impact_matrix_a(p: &BipedParams, theta_minus: &Vector) -> Result<Matrix> {
    let (t1, t2, t3) = theta3(theta_minus);
    let den = impact_denominator(p, theta_minus);
    if den.abs() < MIN_IMPACT_DEN {
        return Err(Error::ZeroImpactDenominator { den });
    }
    let (m, mh, mt, r, l) = (p.m, p.m_hip, p.m_torso, p.r, p.l);

    let a11 = (2.0 * mt * cos(-t1 - t2 + 2.0 * t3) - (2.0 * m + 4.0 * mh + 2.0 * mt) * cos(t1 - t2)) / den;
    let a12 = m / den;
    let a21 = (m - (4.0 * m + 4.0 * mh + 2.0 * mt) * cos(2.0 * t1 - 2.0 * t2)
        + 2.0 * mt * cos(2.0 * t1 - 2.0 * t3))
        / den;
    let a22 = 2.0 * m * cos(t1 - t2) / den;
    let a31 = ((2.0 * m * r + 2.0 * mh * r + 2.0 * mt * r) * cos(t1 - 2.0 * t2 + t3)
        - 2.0 * mh * r * cos(-t1 + t3)
        - (2.0 * m * r + 2.0 * mt * r) * cos(-t1 + t3)
        + m * r * cos(-3.0 * t1 + 2.0 * t2 + t3))
        / (l * den);
    let a32 = -r * m * cos(-t2 + t3) / (l * den);

    Ok(Matrix::from_row_slice(
        3,
        3,
        &[a11, a12, 0.0, a21, a22, 0.0, a31, a32, 1.0],
    ))
}

/// Leg relabeling permutation `R` (involutory).
pub fn relabel(theta: &Vector) -> Vector {
    Vector::from_column_slice(&[theta[1], theta[0], theta[2]])
}

/// The biped as a [`HybridSystem`].
#[derive(Debug, Clone, PartialEq)]
pub struct Biped {
    pub params: BipedParams,
    maps: TorqueMaps,
}

/// Assembles the biped hybrid system: swing dynamics, guard
/// `theta1 - theta1_jmp` and jump `[R theta-; A(theta-) thetadot-]`.
pub fn make_biped_system(params: BipedParams) -> Result<Biped> {
    params.validate()?;
    Ok(Biped {
        params,
        maps: biped_torque_maps(&params),
    })
}

impl Default for Biped {
    fn default() -> Self {
        make_biped_system(BipedParams::default()).expect("default parameters are valid")
    }
}

impl Biped {
    pub fn impact_matrix(&self, theta_minus: &Vector) -> Result<Matrix> {
        impact_matrix_a(&self.params, theta_minus)
    }

    /// Kinetic energy `1/2 thetadot' M thetadot`.
    pub fn kinetic_energy(&self, x: &Vector) -> f64 {
        let q = x.rows(0, 3).into_owned();
        let qd = x.rows(3, 3).into_owned();
        0.5 * qd.dot(&(self.mass(&q) * &qd))
    }
}

impl MechanicalModel for Biped {
    fn dof(&self) -> usize {
        3
    }
    fn n_act(&self) -> usize {
        2
    }
    fn mass(&self, q: &Vector) -> Matrix {
        biped_mass_matrix(&self.params, q)
    }
    fn coriolis(&self, q: &Vector, qd: &Vector) -> Vector {
        biped_coriolis(&self.params, q, qd)
    }
    fn gravity(&self, q: &Vector) -> Vector {
        biped_gravity(&self.params, q)
    }
    fn input_map(&self, _q: &Vector) -> Matrix {
        self.maps.y_u.clone()
    }
    fn embedding_map(&self, _q: &Vector) -> Matrix {
        self.maps.y_emb.clone()
    }
    fn full_input_map(&self, _q: &Vector) -> Matrix {
        self.maps.y.clone()
    }
    fn full_input_map_partial(&self, _q: &Vector, _j: usize) -> Matrix {
        Matrix::zeros(3, 3)
    }

    fn mass_partial(&self, q: &Vector, j: usize) -> Matrix {
        let p = &self.params;
        let (t1, t2, t3) = theta3(q);
        let s12 = sin(t1 - t2);
        let s13 = sin(t1 - t3);
        let a = 0.5 * p.m * p.r * p.r;
        let b = p.m_torso * p.r * p.l;
        // d(M12)/dtheta and d(M13)/dtheta; every other entry is constant.
        let (d12, d13) = match j {
            0 => (a * s12, -b * s13),
            1 => (-a * s12, 0.0),
            2 => (0.0, b * s13),
            _ => panic!("biped has three coordinates"),
        };
        let mut dm = Matrix::zeros(3, 3);
        dm[(0, 1)] = d12;
        dm[(1, 0)] = d12;
        dm[(0, 2)] = d13;
        dm[(2, 0)] = d13;
        dm
    }

    fn coriolis_jacobians(&self, q: &Vector, qd: &Vector) -> (Matrix, Matrix) {
        let p = &self.params;
        let (t1, t2, t3) = theta3(q);
        let (w1, w2, w3) = theta3(qd);
        let (s12, c12) = (sin(t1 - t2), cos(t1 - t2));
        let (s13, c13) = (sin(t1 - t3), cos(t1 - t3));
        let a = 0.5 * p.m * p.r * p.r;
        let b = p.m_torso * p.r * p.l;
        let dq = Matrix::from_row_slice(
            3,
            3,
            &[
                -a * c12 * w2 * w2 + b * c13 * w3 * w3,
                a * c12 * w2 * w2,
                -b * c13 * w3 * w3,
                a * c12 * w1 * w1,
                -a * c12 * w1 * w1,
                0.0,
                -b * c13 * w1 * w1,
                0.0,
                b * c13 * w1 * w1,
            ],
        );
        let dqd = Matrix::from_row_slice(
            3,
            3,
            &[
                0.0,
                -2.0 * a * s12 * w2,
                2.0 * b * s13 * w3,
                2.0 * a * s12 * w1,
                0.0,
                0.0,
                -2.0 * b * s13 * w1,
                0.0,
                0.0,
            ],
        );
        (dq, dqd)
    }

    fn gravity_jacobian(&self, q: &Vector) -> Matrix {
        let p = &self.params;
        let (t1, t2, t3) = theta3(q);
        Matrix::from_diagonal(&Vector::from_column_slice(&[
            -0.5 * p.g * (2.0 * p.m_hip + 3.0 * p.m + 2.0 * p.m_torso) * p.r * cos(t1),
            0.5 * p.g * p.m * p.r * cos(t2),
            -p.g * p.m_torso * p.l * cos(t3),
        ]))
    }
}

impl HybridSystem for Biped {
    fn guard(&self, x: &Vector) -> f64 {
        x[0] - self.params.theta1_jmp
    }

    fn jump(&self, x_minus: &Vector) -> Result<Vector> {
        let theta = x_minus.rows(0, 3).into_owned();
        let omega = x_minus.rows(3, 3).into_owned();
        let a = self.impact_matrix(&theta)?;
        Ok(linalg::vstack(&relabel(&theta), &(a * omega)))
    }

    fn inverse_jump(&self, x_plus: &Vector) -> Result<Vector> {
        let theta_minus = relabel(&x_plus.rows(0, 3).into_owned());
        let a = self.impact_matrix(&theta_minus)?;
        let cond = linalg::condition_number(&a);
        if !(cond <= MAX_IMPACT_COND) {
            return Err(Error::SingularImpactMatrix { cond });
        }
        let omega_plus = x_plus.rows(3, 3).into_owned();
        let omega_minus = linalg::lu_solve(&a, &omega_plus).ok_or(Error::SingularImpactMatrix { cond })?;
        Ok(linalg::vstack(&theta_minus, &omega_minus))
    }

    fn energy(&self, x: &Vector) -> Option<f64> {
        let q = x.rows(0, 3).into_owned();
        Some(self.kinetic_energy(x) + biped_potential(&self.params, &q))
    }
}

/// Initial state used by both gait presets:
/// `[-22.5 deg, 22.5 deg, 20 deg, 50 deg/s, 0 deg/s, 90 deg/s]` in SI units.
pub fn reference_initial_state() -> Vector {
    let d = core::f64::consts::PI / 180.0;
    Vector::from_column_slice(&[-22.5 * d, 22.5 * d, 20.0 * d, 50.0 * d, 0.0, 90.0 * d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{continuous_dynamics, embedded_dynamics, guard_distance};
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn mass_matrix_at_zero() {
        let p = BipedParams::default();
        let m0 = biped_mass_matrix(&p, &Vector::zeros(3));
        let expected = Matrix::from_row_slice(3, 3, &[31.25, -2.5, 5.0, -2.5, 1.25, 0.0, 5.0, 0.0, 2.5]);
        assert!((m0 - expected).abs().max() < 1e-12);
    }

    #[test]
    fn m22_is_constant() {
        let p = BipedParams::default();
        for th in [v(&[0.3, -1.0, 2.0]), v(&[-1.2, 0.4, 0.1])] {
            assert_eq!(biped_mass_matrix(&p, &th)[(1, 1)], 1.25);
        }
    }

    #[test]
    fn gravity_values() {
        let p = BipedParams::default();
        assert_eq!(biped_gravity(&p, &Vector::zeros(3)), Vector::zeros(3));
        let g = biped_gravity(&p, &v(&[PI / 2.0, 0.0, 0.0]));
        assert_relative_eq!(g[0], -318.825, epsilon = 1e-12);
        let th = v(&[0.4, -0.2, 0.9]);
        assert_relative_eq!(biped_gravity(&p, &(-&th)), -biped_gravity(&p, &th), epsilon = 1e-14);
    }

    #[test]
    fn coriolis_vanishes_for_equal_angles_and_zero_rates() {
        let p = BipedParams::default();
        let c = biped_coriolis(&p, &v(&[0.7, 0.7, 0.7]), &v(&[1.0, -2.0, 3.0]));
        assert_eq!(c, Vector::zeros(3));
        let c = biped_coriolis(&p, &v(&[0.1, -0.5, 1.3]), &Vector::zeros(3));
        assert_eq!(c, Vector::zeros(3));
    }

    #[test]
    fn torque_maps_match_generalized_torques() {
        let maps = biped_torque_maps(&BipedParams::default());
        // Cofactor expansion along the first row: -1 * ((-1)(1) - 0) = 1.
        let y = &maps.y;
        let cofactor = y[(0, 0)] * (y[(1, 1)] * y[(2, 2)] - y[(1, 2)] * y[(2, 1)])
            - y[(0, 1)] * (y[(1, 0)] * y[(2, 2)] - y[(1, 2)] * y[(2, 0)])
            + y[(0, 2)] * (y[(1, 0)] * y[(2, 1)] - y[(1, 1)] * y[(2, 0)]);
        assert_eq!(cofactor, 1.0);
        assert_relative_eq!(y.determinant(), 1.0, epsilon = 1e-14);
        let u = v(&[3.0, -7.0]);
        assert_eq!(&maps.y_u * &u, v(&[-3.0, 7.0, -4.0]));
        assert_eq!(maps.y_emb, Matrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]));
        let inv = maps.y.clone().try_inverse().unwrap();
        assert!((inv * &maps.y - Matrix::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn impact_matrix_structure() {
        let p = BipedParams::default();
        for th in [v(&[PI / 8.0, -PI / 8.0, 0.35]), v(&[0.2, 0.5, -0.3])] {
            let a = impact_matrix_a(&p, &th).unwrap();
            assert_eq!(a[(0, 2)], 0.0);
            assert_eq!(a[(1, 2)], 0.0);
            assert_eq!(a[(2, 2)], 1.0);
        }
    }

    #[test]
    fn rest_state_is_equilibrium() {
        let b = Biped::default();
        let d = continuous_dynamics(&b, &Vector::zeros(6), &Vector::zeros(2)).unwrap();
        assert_eq!(d, Vector::zeros(6));
        let d = continuous_dynamics(&b, &v(&[0.0, 0.0, 0.0, 1.0, 2.0, 3.0]), &v(&[5.0, 1.0])).unwrap();
        assert_eq!(d.rows(0, 3).into_owned(), v(&[1.0, 2.0, 3.0]));
    }

    #[test]
    fn unit_embedding_input_at_rest() {
        let b = Biped::default();
        let d = embedded_dynamics(&b, &Vector::zeros(6), &Vector::zeros(2), &v(&[1.0])).unwrap();
        // Oracle: M(0) qdd = [0, 0, 1] solved by Cramer's rule.
        let m = biped_mass_matrix(&b.params, &Vector::zeros(3));
        let det = m.determinant();
        let mut m3 = m.clone();
        m3.set_column(2, &v(&[0.0, 0.0, 1.0]));
        let mut m1 = m.clone();
        m1.set_column(0, &v(&[0.0, 0.0, 1.0]));
        assert_relative_eq!(d[5], m3.determinant() / det, epsilon = 1e-14);
        assert_relative_eq!(d[3], m1.determinant() / det, epsilon = 1e-14);
    }

    #[test]
    fn guard_values() {
        let b = Biped::default();
        let mut x = Vector::zeros(6);
        x[0] = PI / 8.0;
        assert_eq!(guard_distance(&b, &x), 0.0);
        assert_relative_eq!(guard_distance(&b, &reference_initial_state()), -PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn final_state_angles() {
        let b = Biped::default();
        let xf = b.inverse_jump(&reference_initial_state()).unwrap();
        let d = PI / 180.0;
        assert_relative_eq!(xf[0], 22.5 * d, epsilon = 1e-15);
        assert_relative_eq!(xf[1], -22.5 * d, epsilon = 1e-15);
        assert_relative_eq!(xf[2], 20.0 * d, epsilon = 1e-15);
        assert_relative_eq!(guard_distance(&b, &xf), 0.0, epsilon = 1e-15);
        let back = b.jump(&xf).unwrap();
        assert!((back - reference_initial_state()).amax() < 1e-10);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = BipedParams { l: 0.0, ..BipedParams::default() };
        assert!(matches!(make_biped_system(p), Err(Error::InvalidParameter(_))));
    }
}
