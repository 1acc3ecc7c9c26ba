//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use std::f64::consts::{PI, TAU};
use torusrep::torus_dynamics::{Segment, ShearingMap, ShearingProfile, ShearingProgram};

pub const NORMALS: [[i64; 2]; 10] = [
    [1, 0],
    [0, 1],
    [1, 1],
    [1, -1],
    [2, 1],
    [1, 2],
    [2, -1],
    [3, 2],
    [2, -3],
    [1, 3],
];

pub fn random_profile<R: Rng + ?Sized>(rng: &mut R, amplitude: f64, odd: bool) -> ShearingProfile {
    let mut p = ShearingProfile::zero();
    for m in 1..=rng.gen_range(1..=2u32) {
        p.sine.push((m, rng.gen_range(-amplitude..amplitude)));
    }
    if !odd && rng.gen_bool(0.5) {
        p.cosine.push((1, rng.gen_range(-amplitude..amplitude)));
    }
    p
}

pub fn random_map<R: Rng + ?Sized>(rng: &mut R, amplitude: f64, odd: bool) -> ShearingMap {
    let w = NORMALS[rng.gen_range(0..NORMALS.len())];
    let w = if rng.gen_bool(0.5) { w } else { [-w[0], -w[1]] };
    ShearingMap::along_normal(w, random_profile(rng, amplitude, odd)).unwrap()
}

/// Up to three segments with up to three maps and three repeats each.
pub fn random_program<R: Rng + ?Sized>(rng: &mut R, amplitude: f64, odd: bool) -> ShearingProgram {
    let count = rng.gen_range(1..=3usize);
    let mut cuts: Vec<f64> = (0..count - 1).map(|_| rng.gen_range(0.05..0.95)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut bounds = vec![0.0];
    bounds.extend(cuts);
    bounds.push(1.0);
    let segments = bounds
        .windows(2)
        .map(|b| Segment {
            start: b[0],
            end: b[1],
            maps: (0..rng.gen_range(1..=3)).map(|_| random_map(rng, amplitude, odd)).collect(),
            repeats: rng.gen_range(1..=3),
        })
        .collect();
    ShearingProgram::new(segments).unwrap()
}

pub fn random_point<R: Rng + ?Sized>(rng: &mut R) -> [f64; 2] {
    [rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)]
}

/// Central-difference Jacobian determinant.
pub fn fd_det(f: impl Fn([f64; 2]) -> [f64; 2], p: [f64; 2], h: f64) -> f64 {
    let dx = {
        let a = f([p[0] + h, p[1]]);
        let b = f([p[0] - h, p[1]]);
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
    };
    let dy = {
        let a = f([p[0], p[1] + h]);
        let b = f([p[0], p[1] - h]);
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
    };
    dx[0] * dy[1] - dx[1] * dy[0]
}

pub fn wrap_pi(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distance on R²/2πZ².
pub fn torus_dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    wrap_pi(p[0] - q[0]).hypot(wrap_pi(p[1] - q[1]))
}

/// Classical RK4 for an autonomous or time-dependent planar field.
pub fn rk4(f: &dyn Fn(f64, [f64; 2]) -> [f64; 2], p: [f64; 2], t1: f64, steps: usize) -> [f64; 2] {
    let h = t1 / steps as f64;
    let mut q = p;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, q);
        let k2 = f(t + h / 2.0, [q[0] + h / 2.0 * k1[0], q[1] + h / 2.0 * k1[1]]);
        let k3 = f(t + h / 2.0, [q[0] + h / 2.0 * k2[0], q[1] + h / 2.0 * k2[1]]);
        let k4 = f(t + h, [q[0] + h * k3[0], q[1] + h * k3[1]]);
        for r in 0..2 {
            q[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
        }
    }
    q
}

/// Hamilton product of unit quaternions stored as [w, x, y, z].
pub fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub fn qinv(a: [f64; 4]) -> [f64; 4] {
    [a[0], -a[1], -a[2], -a[3]]
}

pub fn qword(images: &[[f64; 4]], word: &[i32]) -> [f64; 4] {
    word.iter().fold([1.0, 0.0, 0.0, 0.0], |acc, &a| {
        let g = images[a.unsigned_abs() as usize - 1];
        qmul(acc, if a > 0 { g } else { qinv(g) })
    })
}

/// Operator-norm distance between the SU(2) matrices of two unit
/// quaternions: ‖A − B‖ = |a − b| in R⁴.
pub fn qdist(a: [f64; 4], b: [f64; 4]) -> f64 {
    (0..4).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

pub fn qresidual(images: &[[f64; 4]], relators: &[Vec<i32>]) -> f64 {
    relators
        .iter()
        .map(|r| qdist(qword(images, r), [1.0, 0.0, 0.0, 0.0]))
        .fold(0.0, f64::max)
}

/// Largest ‖gh − hg‖ over pairs of images.
pub fn qnoncommutativity(images: &[[f64; 4]]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            best = best.max(qdist(qmul(images[i], images[j]), qmul(images[j], images[i])));
        }
    }
    best
}

/// 2×2 integer matrix product mod p, entries [a, b, c, d] row-major.
pub fn mat_mul_mod(x: [u64; 4], y: [u64; 4], p: u64) -> [u64; 4] {
    let m = |a: u64, b: u64| (a as u128 * b as u128 % p as u128) as u64;
    let s = |a: u64, b: u64| (a + b) % p;
    [
        s(m(x[0], y[0]), m(x[1], y[2])),
        s(m(x[0], y[1]), m(x[1], y[3])),
        s(m(x[2], y[0]), m(x[3], y[2])),
        s(m(x[2], y[1]), m(x[3], y[3])),
    ]
}
