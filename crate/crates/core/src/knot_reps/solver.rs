use super::group::{KnotGroup, Presentation, Word};
use super::su2::Su2;
use rand::Rng;
use serde::{Deserialize, Serialize};
use crate::torus_dynamics::point::wrap_angle;

/// Left-to-right product of generator images.
pub fn eval_word(images: &[Su2], w: &[i32]) -> Su2 {
    w.iter().fold(Su2::IDENTITY, |acc, &a| {
        let g = images[a.unsigned_abs() as usize - 1];
        acc * if a > 0 { g } else { g.inverse() }
    })
}

/// Largest operator-norm deviation of a relator image from the identity.
pub fn relator_residual(images: &[Su2], relators: &[Word]) -> f64 {
    relators
        .iter()
        .map(|r| eval_word(images, r).distance(Su2::IDENTITY))
        .fold(0.0, f64::max)
}

/// Largest commutator distance over generator pairs; zero iff the image is
/// abelian.
pub fn noncommutativity(images: &[Su2]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            best = best.max(Su2::commutator(images[i], images[j]).distance(Su2::IDENTITY));
        }
    }
    best
}

/// Generator images with their relator residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepAssignment {
    pub images: Vec<Su2>,
    pub residual: f64,
}

impl RepAssignment {
    pub fn new(images: Vec<Su2>, presentation: &Presentation) -> Self {
        let residual = relator_residual(&images, &presentation.relators);
        Self { images, residual }
    }

    pub fn eval(&self, w: &[i32]) -> Su2 {
        eval_word(&self.images, w)
    }

    pub fn noncommutativity(&self) -> f64 {
        noncommutativity(&self.images)
    }

    /// Max distance between corresponding images.
    pub fn distance(&self, other: &Self) -> f64 {
        self.images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| a.distance(*b))
            .fold(0.0, f64::max)
    }

    pub fn conjugate_by(&self, c: Su2) -> Self {
        Self {
            images: self.images.iter().map(|g| g.conjugate_by(c)).collect(),
            residual: self.residual,
        }
    }

    /// Pillowcase coordinates `(α, β)` of the peripheral images, assuming
    /// the meridian image lies on the maximal torus; β ∈ [0, 2π).
    pub fn peripheral_angles(&self, group: &KnotGroup) -> (f64, f64) {
        let m = self.eval(&group.meridian);
        let l = self.eval(&group.longitude);
        let a = m.x.atan2(m.w);
        let b = l.x.atan2(l.w);
        (a, wrap_angle(b))
    }
}

/// Conjugates by the maximal torus so that the first generator from
/// `gauge` onwards with a non-negligible off-torus part has `y = 0` and
/// `z ≥ 0`. Leaves the torus, and hence a diagonal meridian, fixed.
pub fn canonicalize_gauge(images: &[Su2], gauge: usize) -> Vec<Su2> {
    let n = images.len();
    for k in (gauge..n).chain(0..gauge.min(n)) {
        let g = images[k];
        let r = g.y.hypot(g.z);
        if r > 1e-9 {
            let phi = std::f64::consts::FRAC_PI_2 - g.z.atan2(g.y);
            let c = Su2::diag(phi / 2.0);
            let mut out: Vec<Su2> = images.iter().map(|q| q.conjugate_by(c)).collect();
            // the chosen image is exactly in the xz-plane
            out[k] = Su2::new(out[k].w, out[k].x, 0.0, r);
            return out;
        }
    }
    images.to_vec()
}

/// Haar-random element of SU(2).
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
    loop {
        let v: [f64; 4] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            return Su2::new(v[0], v[1], v[2], v[3]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop once every residual component is below this.
    pub tol: f64,
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-14,
            fd_step: 1e-6,
        }
    }
}

/// Equations for generator images: relators equal the identity, target
/// words take prescribed values, and optionally one generator has zero `j`
/// component.
#[derive(Debug, Clone)]
pub struct RepProblem<'a> {
    pub generators: usize,
    pub relators: &'a [Word],
    pub targets: Vec<(Word, Su2)>,
    pub gauge: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub images: Vec<Su2>,
    /// Max absolute residual component.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl RepProblem<'_> {
    fn residuals(&self, images: &[Su2]) -> Vec<f64> {
        let mut r = Vec::with_capacity(4 * (self.relators.len() + self.targets.len()) + 1);
        for w in self.relators {
            let q = eval_word(images, w);
            r.extend([q.w - 1.0, q.x, q.y, q.z]);
        }
        for (w, t) in &self.targets {
            let q = eval_word(images, w);
            r.extend([q.w - t.w, q.x - t.x, q.y - t.y, q.z - t.z]);
        }
        if let Some(k) = self.gauge {
            r.push(images[k].y);
        }
        r
    }

    fn perturbed(images: &[Su2], xi: &[f64]) -> Vec<Su2> {
        images
            .iter()
            .enumerate()
            .map(|(k, g)| Su2::exp([xi[3 * k], xi[3 * k + 1], xi[3 * k + 2]]) * *g)
            .collect()
    }

    /// Levenberg–Marquardt in the left exponential chart of each generator.
    pub fn solve(&self, init: &[Su2], opts: &LmOptions) -> LmOutcome {
        let n = 3 * self.generators;
        let mut x = init.to_vec();
        let mut r = self.residuals(&x);
        let inf = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sq = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
        let mut cost = sq(&r);
        let mut lambda = 1e-3;
        let mut it = 0;
        while it < opts.max_iter && inf(&r) > opts.tol {
            it += 1;
            let m = r.len();
            let mut jac = vec![vec![0.0; n]; m];
            let h = opts.fd_step;
            for c in 0..n {
                let mut e = vec![0.0; n];
                e[c] = h;
                let rp = self.residuals(&Self::perturbed(&x, &e));
                e[c] = -h;
                let rm = self.residuals(&Self::perturbed(&x, &e));
                for i in 0..m {
                    jac[i][c] = (rp[i] - rm[i]) / (2.0 * h);
                }
            }
            let mut jtj = vec![vec![0.0; n]; n];
            let mut jtr = vec![0.0; n];
            for i in 0..m {
                for a in 0..n {
                    let ja = jac[i][a];
                    if ja == 0.0 {
                        continue;
                    }
                    jtr[a] += ja * r[i];
                    for b in 0..n {
                        jtj[a][b] += ja * jac[i][b];
                    }
                }
            }
            let mut improved = false;
            for _ in 0..12 {
                let mut a = jtj.clone();
                for (d, row) in a.iter_mut().enumerate() {
                    row[d] += lambda * (1.0 + row[d]);
                }
                let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
                let Some(step) = solve_spd(a, rhs) else {
                    lambda *= 10.0;
                    continue;
                };
                let xt = Self::perturbed(&x, &step);
                let rt = self.residuals(&xt);
                let ct = sq(&rt);
                if ct < cost {
                    x = xt;
                    r = rt;
                    cost = ct;
                    lambda = (lambda / 5.0).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 8.0;
            }
            if !improved {
                break;
            }
        }
        let residual = inf(&r);
        LmOutcome {
            images: x,
            residual,
            converged: residual <= opts.tol.max(1e-12),
            iterations: it,
        }
    }
}

/// Solves a symmetric positive definite system by Cholesky factorization.
pub fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i][k] * b[k];
        }
        b[i] = s / a[i][i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k][i] * b[k];
        }
        b[i] = s / a[i][i];
    }
    Some(b)
}
