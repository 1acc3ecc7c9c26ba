use super::fourier::{FourierError, FourierField, GridSamples};
use super::interp::PeriodicGrid;
use super::point::{grid_point, wrap_signed};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type FieldFn = dyn Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error("gridded field: {0}")]
    BadGrid(String),
    #[error("isotopy is not the identity at t = 0 (deviation {0:.3e})")]
    NotIdentityAtZero(f64),
    #[error("Newton inversion failed at t = {t}, q = {q:?} (residual {residual:.3e})")]
    InverseFailed { t: f64, q: [f64; 2], residual: f64 },
    #[error("field declared equivariant deviates by {0:.3e}")]
    NotEquivariant(f64),
    #[error("need at least two time samples")]
    TooFewSamples,
}

/// A time-dependent vector field X_t on the torus, t ∈ [0, 1].
#[derive(Clone)]
pub struct TimeField {
    eval: Arc<FieldFn>,
    /// Resolution of the grid on which norms and coefficients are estimated.
    pub grid: usize,
    pub equivariant: bool,
    /// Number of uniformly spaced times used for estimates over t.
    pub time_samples: usize,
}

impl fmt::Debug for TimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeField")
            .field("grid", &self.grid)
            .field("equivariant", &self.equivariant)
            .field("time_samples", &self.time_samples)
            .finish_non_exhaustive()
    }
}

impl TimeField {
    pub fn new(
        f: impl Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync + 'static,
        grid: usize,
        equivariant: bool,
    ) -> Self {
        Self {
            eval: Arc::new(f),
            grid,
            equivariant,
            time_samples: 21,
        }
    }

    pub fn autonomous(field: FourierField, grid: usize) -> Self {
        let eq = field.equivariant;
        Self::new(move |_, p| field.eval(p), grid, eq)
    }

    pub fn with_time_samples(mut self, t: usize) -> Self {
        self.time_samples = t.max(2);
        self
    }

    #[inline]
    pub fn eval(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        (self.eval)(t, p)
    }

    pub fn function(&self) -> Arc<FieldFn> {
        self.eval.clone()
    }

    pub fn samples_at(&self, t: f64) -> GridSamples {
        self.samples_at_resolution(t, self.grid)
    }

    pub fn samples_at_resolution(&self, t: f64, n: usize) -> GridSamples {
        GridSamples::from_fn(n, |p| self.eval(t, p))
    }

    pub fn times(&self) -> Vec<f64> {
        let m = self.time_samples.max(2);
        (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
    }

    /// Largest |X_t(−p) + X_t(p)| over grid points and sample times.
    pub fn equivariance_defect(&self) -> f64 {
        let n = self.grid;
        let mut worst: f64 = 0.0;
        for t in self.times() {
            for i in 0..n {
                for j in 0..n {
                    let p = grid_point(i, j, n);
                    let a = self.eval(t, p);
                    let b = self.eval(t, [-p[0], -p[1]]);
                    worst = worst.max((a[0] + b[0]).hypot(a[1] + b[1]));
                }
            }
        }
        worst
    }
}

/// Operator norm of a 2×2 matrix (largest singular value).
pub fn op_norm(m: [[f64; 2]; 2]) -> f64 {
    let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let d = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
    (0.5 * (tr + disc)).max(0.0).sqrt()
}

/// Central-difference Jacobian of p ↦ f(p), row-major.
pub fn fd_jacobian(f: impl Fn([f64; 2]) -> [f64; 2], p: [f64; 2], h: f64) -> [[f64; 2]; 2] {
    let fx1 = f([p[0] + h, p[1]]);
    let fx0 = f([p[0] - h, p[1]]);
    let fy1 = f([p[0], p[1] + h]);
    let fy0 = f([p[0], p[1] - h]);
    let s = 0.5 / h;
    [
        [(fx1[0] - fx0[0]) * s, (fy1[0] - fy0[0]) * s],
        [(fx1[1] - fx0[1]) * s, (fy1[1] - fy0[1]) * s],
    ]
}

pub const SAFETY_FACTOR: f64 = 1.1;

/// Grid estimate of the Lipschitz constant: max operator norm of the
/// finite-difference Jacobian over grid points and sample times, times 1.1.
pub fn estimate_lipschitz(field: &TimeField) -> f64 {
    let n = field.grid;
    let mut worst: f64 = 0.0;
    for t in field.times() {
        for i in 0..n {
            for j in 0..n {
                let p = grid_point(i, j, n);
                let jac = fd_jacobian(|q| field.eval(t, q), p, 1e-5);
                worst = worst.max(op_norm(jac));
            }
        }
    }
    worst * SAFETY_FACTOR
}

/// Vector coefficients of one Fourier term in a field spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub k: [i64; 2],
    pub u_sin: [f64; 2],
    #[serde(default)]
    pub u_cos: [f64; 2],
}

/// JSON description of a time-dependent field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Autonomous finite Fourier sum.
    Fourier {
        terms: Vec<TermSpec>,
        #[serde(default)]
        constant: [f64; 2],
    },
    /// X_t = (1 − t)·from + t·to.
    Blend {
        from: Box<FieldSpec>,
        to: Box<FieldSpec>,
    },
    /// Samples `samples[r][i·n + j]` at times `times[r]` on the n×n grid;
    /// bicubic in space, linear in time.
    Gridded {
        n: usize,
        times: Vec<f64>,
        samples: Vec<Vec<[f64; 2]>>,
    },
}

/// A field spec plus estimation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub field: FieldSpec,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub equivariant: bool,
    #[serde(default = "default_time_samples")]
    pub time_samples: usize,
}

fn default_grid() -> usize {
    64
}

fn default_time_samples() -> usize {
    21
}

type Evaluator = Box<dyn Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync>;

impl FieldSpec {
    fn evaluator(&self, div_tol: f64) -> Result<Evaluator, FieldError> {
        Ok(match self {
            FieldSpec::Fourier { terms, constant } => {
                let coeffs: Vec<_> = terms.iter().map(|t| (t.k, t.u_sin, t.u_cos)).collect();
                let f = FourierField::from_coefficients(&coeffs, *constant, div_tol)?;
                Box::new(move |_, p| f.eval(p))
            }
            FieldSpec::Blend { from, to } => {
                let a = from.evaluator(div_tol)?;
                let b = to.evaluator(div_tol)?;
                Box::new(move |t, p| {
                    let x = a(t, p);
                    let y = b(t, p);
                    [(1.0 - t) * x[0] + t * y[0], (1.0 - t) * x[1] + t * y[1]]
                })
            }
            FieldSpec::Gridded { n, times, samples } => {
                let g = GriddedField::new(*n, times.clone(), samples.clone())?;
                Box::new(move |t, p| g.eval(t, p))
            }
        })
    }
}

impl FieldConfig {
    pub fn build(&self, div_tol: f64) -> Result<TimeField, FieldError> {
        let f = self.field.evaluator(div_tol)?;
        Ok(TimeField::new(f, self.grid, self.equivariant).with_time_samples(self.time_samples))
    }
}

/// Sampled field, bicubic in space and piecewise linear in time.
#[derive(Debug, Clone)]
pub struct GriddedField {
    times: Vec<f64>,
    slices: Vec<[PeriodicGrid; 2]>,
}

impl GriddedField {
    pub fn new(n: usize, times: Vec<f64>, samples: Vec<Vec<[f64; 2]>>) -> Result<Self, FieldError> {
        if times.is_empty() || times.len() != samples.len() {
            return Err(FieldError::BadGrid("times and samples differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FieldError::BadGrid("times must increase strictly".into()));
        }
        let mut slices = Vec::with_capacity(samples.len());
        for s in samples {
            if s.len() != n * n {
                return Err(FieldError::BadGrid(format!("expected {} samples per time", n * n)));
            }
            let gx = PeriodicGrid::new(n, s.iter().map(|v| v[0]).collect());
            let gy = PeriodicGrid::new(n, s.iter().map(|v| v[1]).collect());
            slices.push([gx, gy]);
        }
        Ok(Self { times, slices })
    }

    pub fn eval(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        let at = |r: usize| [self.slices[r][0].eval(p), self.slices[r][1].eval(p)];
        let m = self.times.len();
        if m == 1 || t <= self.times[0] {
            return at(0);
        }
        if t >= self.times[m - 1] {
            return at(m - 1);
        }
        let r = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[r], self.times[r + 1]);
        let s = (t - t0) / (t1 - t0);
        let a = at(r);
        let b = at(r + 1);
        [(1.0 - s) * a[0] + s * b[0], (1.0 - s) * a[1] + s * b[1]]
    }
}

/// Settings for [`derive_time_field`].
#[derive(Debug, Clone, Copy)]
pub struct DeriveOptions {
    pub grid: usize,
    pub time_step: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub equivariant: bool,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        Self {
            grid: 64,
            time_step: 1e-5,
            newton_tol: 1e-12,
            max_iter: 50,
            equivariant: false,
        }
    }
}

/// Finds p with ψ(p) ≡ q (mod 2π) by damped Newton from `guess`.
pub fn newton_inverse(
    psi: impl Fn([f64; 2]) -> [f64; 2],
    q: [f64; 2],
    guess: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> Result<[f64; 2], f64> {
    let resid = |p: [f64; 2]| {
        let v = psi(p);
        [wrap_signed(v[0] - q[0]), wrap_signed(v[1] - q[1])]
    };
    let mut p = guess;
    let mut r = resid(p);
    let mut nr = r[0].hypot(r[1]);
    for _ in 0..max_iter {
        if nr <= tol {
            return Ok(p);
        }
        let j = fd_jacobian(&psi, p, 1e-6);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det.abs() < 1e-14 {
            return Err(nr);
        }
        let dx = [
            (j[1][1] * r[0] - j[0][1] * r[1]) / det,
            (-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];
        let mut lambda = 1.0;
        loop {
            let cand = [p[0] - lambda * dx[0], p[1] - lambda * dx[1]];
            let rc = resid(cand);
            let nc = rc[0].hypot(rc[1]);
            if nc < nr || lambda < 1e-6 {
                p = cand;
                r = rc;
                nr = nc;
                break;
            }
            lambda *= 0.5;
        }
    }
    if nr <= tol {
        Ok(p)
    } else {
        Err(nr)
    }
}

/// Recovers the generating field X_t(q) = ∂_t ψ(t, ψ_t⁻¹(q)) on the grid at
/// `samples` uniform times and returns it as a gridded field.
///
/// `psi` acts on lifts in R².
pub fn derive_time_field(
    psi: impl Fn(f64, [f64; 2]) -> [f64; 2] + Sync,
    samples: usize,
    opts: DeriveOptions,
) -> Result<TimeField, FieldError> {
    if samples < 2 {
        return Err(FieldError::TooFewSamples);
    }
    let n = opts.grid;
    let mut dev0: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = grid_point(i, j, n);
            let q = psi(0.0, p);
            dev0 = dev0.max((q[0] - p[0]).hypot(q[1] - p[1]));
        }
    }
    if dev0 > 1e-9 {
        return Err(FieldError::NotIdentityAtZero(dev0));
    }
    let h = opts.time_step;
    let times: Vec<f64> = (0..samples).map(|r| r as f64 / (samples - 1) as f64).collect();
    let mut all = Vec::with_capacity(samples);
    for &t in &times {
        let images: Vec<[f64; 2]> = (0..n * n)
            .map(|idx| psi(t, grid_point(idx / n, idx % n, n)))
            .collect();
        let mut slice = Vec::with_capacity(n * n);
        for idx in 0..n * n {
            let q = grid_point(idx / n, idx % n, n);
            let f = |p: [f64; 2]| psi(t, p);
            let d = psi(t, q);
            let guess = [q[0] - (d[0] - q[0]), q[1] - (d[1] - q[1])];
            let p = match newton_inverse(f, q, guess, opts.newton_tol, opts.max_iter) {
                Ok(p) => p,
                Err(_) => {
                    // fall back to the nearest forward image of a grid node
                    let mut best = (f64::INFINITY, 0);
                    for (k, im) in images.iter().enumerate() {
                        let dd = super::point::torus_distance(*im, q);
                        if dd < best.0 {
                            best = (dd, k);
                        }
                    }
                    let g = grid_point(best.1 / n, best.1 % n, n);
                    newton_inverse(f, q, g, opts.newton_tol, opts.max_iter)
                        .map_err(|residual| FieldError::InverseFailed { t, q, residual })?
                }
            };
            let v = if t - h < 0.0 {
                let a = psi(t, p);
                let b = psi(t + h, p);
                let c = psi(t + 2.0 * h, p);
                [
                    (-3.0 * a[0] + 4.0 * b[0] - c[0]) / (2.0 * h),
                    (-3.0 * a[1] + 4.0 * b[1] - c[1]) / (2.0 * h),
                ]
            } else if t + h > 1.0 {
                let a = psi(t, p);
                let b = psi(t - h, p);
                let c = psi(t - 2.0 * h, p);
                [
                    (3.0 * a[0] - 4.0 * b[0] + c[0]) / (2.0 * h),
                    (3.0 * a[1] - 4.0 * b[1] + c[1]) / (2.0 * h),
                ]
            } else {
                let a = psi(t + h, p);
                let b = psi(t - h, p);
                [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
            };
            slice.push(v);
        }
        all.push(slice);
    }
    let g = GriddedField::new(n, times, all)?;
    Ok(TimeField::new(move |t, p| g.eval(t, p), n, opts.equivariant).with_time_samples(samples))
}

/// Uniform grid spacing 2π/n.
pub fn spacing(n: usize) -> f64 {
    TAU / n as f64
}
