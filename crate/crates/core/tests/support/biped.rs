//! The biped rebuilt from point-mass kinematics, independent of the closed
//! forms in the crate. Positions are measured from the stance foot; a link of
//! signed length `L` at absolute angle `th` contributes `L (sin th, cos th)`.

use hybrid_orbits_core::biped::BipedParams;
use hybrid_orbits_core::{Matrix, Vector};

struct Body {
    mass: f64,
    links: Vec<(usize, f64)>,
}

fn bodies(p: &BipedParams) -> Vec<Body> {
    vec![
        Body { mass: p.m, links: vec![(0, p.r / 2.0)] },
        Body { mass: p.m_hip, links: vec![(0, p.r)] },
        Body { mass: p.m, links: vec![(0, p.r), (1, -p.r / 2.0)] },
        Body { mass: p.m_torso, links: vec![(0, p.r), (2, p.l)] },
    ]
}

/// `d position / d theta`, 2 x 3.
fn jacobian(links: &[(usize, f64)], th: &Vector) -> Matrix {
    let mut j = Matrix::zeros(2, 3);
    for &(c, len) in links {
        j[(0, c)] += len * th[c].cos();
        j[(1, c)] -= len * th[c].sin();
    }
    j
}

pub fn mass(p: &BipedParams, th: &Vector) -> Matrix {
    bodies(p).iter().fold(Matrix::zeros(3, 3), |acc, b| {
        let j = jacobian(&b.links, th);
        acc + j.transpose() * j * b.mass
    })
}

/// `sum m J' (dJ/dt) thdot`.
pub fn coriolis(p: &BipedParams, th: &Vector, thd: &Vector) -> Vector {
    bodies(p).iter().fold(Vector::zeros(3), |acc, b| {
        let mut a = Vector::zeros(2);
        for &(c, len) in &b.links {
            a[0] -= len * thd[c] * thd[c] * th[c].sin();
            a[1] -= len * thd[c] * thd[c] * th[c].cos();
        }
        acc + jacobian(&b.links, th).transpose() * a * b.mass
    })
}

pub fn potential(p: &BipedParams, th: &Vector) -> f64 {
    bodies(p)
        .iter()
        .map(|b| b.mass * p.g * b.links.iter().map(|&(c, len)| len * th[c].cos()).sum::<f64>())
        .sum()
}

pub fn gravity(p: &BipedParams, th: &Vector) -> Vector {
    bodies(p).iter().fold(Vector::zeros(3), |mut acc, b| {
        for &(c, len) in &b.links {
            acc[c] -= b.mass * p.g * len * th[c].sin();
        }
        acc
    })
}

pub fn energy(p: &BipedParams, x: &Vector) -> f64 {
    let th = x.rows(0, 3).into_owned();
    let thd = x.rows(3, 3).into_owned();
    0.5 * thd.dot(&(mass(p, &th) * &thd)) + potential(p, &th)
}

/// Post-impact rates from a plastic impact of the swing foot: in extended
/// coordinates `(theta, foot position)` the impulse acts at the swing foot,
/// which is at rest afterwards; then the legs swap labels.
pub fn impact_rates(p: &BipedParams, th: &Vector, thd: &Vector) -> Vector {
    let ext = |links: &[(usize, f64)]| {
        let mut j = Matrix::zeros(2, 5);
        j.view_mut((0, 0), (2, 3)).copy_from(&jacobian(links, th));
        j[(0, 3)] = 1.0;
        j[(1, 4)] = 1.0;
        j
    };
    let me = bodies(p).iter().fold(Matrix::zeros(5, 5), |acc, b| {
        let j = ext(&b.links);
        acc + j.transpose() * j * b.mass
    });
    let js = ext(&[(0, p.r), (1, -p.r)]);
    let mut kkt = Matrix::zeros(7, 7);
    kkt.view_mut((0, 0), (5, 5)).copy_from(&me);
    kkt.view_mut((0, 5), (5, 2)).copy_from(&(-js.transpose()));
    kkt.view_mut((5, 0), (2, 5)).copy_from(&js);
    let mut qd = Vector::zeros(5);
    qd.rows_mut(0, 3).copy_from(thd);
    let mut rhs = Vector::zeros(7);
    rhs.rows_mut(0, 5).copy_from(&(&me * qd));
    let sol = kkt.lu().solve(&rhs).expect("impact system is regular");
    Vector::from_vec(vec![sol[1], sol[0], sol[2]])
}
