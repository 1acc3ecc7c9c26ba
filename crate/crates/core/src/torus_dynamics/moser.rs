use super::field::{fd_jacobian, FieldError};
use super::flow::rk4_step;
use super::interp::PeriodicGrid;
use super::point::{grid_point, wrap_signed};
use super::spectral;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type Isotopy = Arc<dyn Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync>;

/// JSON description of an isotopy φ(t, p) acting on lifted points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IsotopySpec {
    Identity,
    /// p + t·velocity.
    Translation { velocity: [f64; 2] },
    /// Exact flow p + t·sin(k·p)·u of a shearing field; needs u·k = 0.
    Shear { k: [i64; 2], u: [f64; 2] },
    /// y += amplitude·t·b(x − cx)·b(y − cy) with b(s) = (1 − (s/r)²)⁴ on |s| < r.
    Bump {
        amplitude: f64,
        center: [f64; 2],
        radius: f64,
    },
    /// y += amplitude·t·sin(x)·b(y − π); commutes with p ↦ −p.
    EquivariantBump { amplitude: f64, radius: f64 },
}

fn poly_bump(s: f64, r: f64) -> f64 {
    let u = s / r;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - u * u).powi(4)
    }
}

impl IsotopySpec {
    pub fn is_equivariant(&self) -> bool {
        match self {
            IsotopySpec::Identity | IsotopySpec::Shear { .. } | IsotopySpec::EquivariantBump { .. } => true,
            IsotopySpec::Translation { velocity } => velocity == &[0.0, 0.0],
            IsotopySpec::Bump { amplitude, .. } => *amplitude == 0.0,
        }
    }

    pub fn isotopy(&self) -> Isotopy {
        match *self {
            IsotopySpec::Identity => Arc::new(|_, p| p),
            IsotopySpec::Translation { velocity: v } => Arc::new(move |t, p| [p[0] + t * v[0], p[1] + t * v[1]]),
            IsotopySpec::Shear { k, u } => Arc::new(move |t, p| {
                let s = (k[0] as f64 * p[0] + k[1] as f64 * p[1]).sin();
                [p[0] + t * s * u[0], p[1] + t * s * u[1]]
            }),
            IsotopySpec::Bump { amplitude, center, radius } => Arc::new(move |t, p| {
                let b = poly_bump(wrap_signed(p[0] - center[0]), radius) * poly_bump(wrap_signed(p[1] - center[1]), radius);
                [p[0], p[1] + amplitude * t * b]
            }),
            IsotopySpec::EquivariantBump { amplitude, radius } => Arc::new(move |t, p| {
                let b = p[0].sin() * poly_bump(wrap_signed(p[1] - PI), radius);
                [p[0], p[1] + amplitude * t * b]
            }),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoserError {
    #[error("form degenerate at t = {t}: pointwise density {density:.3e} below floor {floor}")]
    DegenerateForm { t: f64, density: f64, floor: f64 },
    #[error("Poisson residual {residual:.3e} exceeds {tol:.1e} at t = {t}")]
    PoissonFailed { t: f64, residual: f64, tol: f64 },
    #[error("isotopy is not the identity at t = 0 (deviation {0:.3e})")]
    NotIdentityAtZero(f64),
    #[error("grid size must be even and at least 8")]
    BadGrid,
    #[error("need at least two time samples")]
    TooFewSamples,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MoserOptions {
    /// Spectral grid M.
    pub grid: usize,
    /// Number of uniformly spaced times T.
    pub time_samples: usize,
    /// Half-width of the rescaling bump around y = π.
    pub bump_width: f64,
    /// RK4 steps for the correcting flow over s ∈ [0, 1].
    pub s_steps: usize,
    /// Spectral upsampling factor before interpolation.
    pub upsample: usize,
    pub equivariant: bool,
    pub form_floor: f64,
    pub poisson_tol: f64,
    pub area_tol: f64,
    pub curve_tol: f64,
    pub fd_step: f64,
}

impl Default for MoserOptions {
    fn default() -> Self {
        Self {
            grid: 128,
            time_samples: 11,
            bump_width: 1.5,
            s_steps: 24,
            upsample: 4,
            equivariant: false,
            form_floor: 0.1,
            poisson_tol: 1e-9,
            area_tol: 1e-3,
            curve_tol: 1e-3,
            fd_step: 1e-5,
        }
    }
}

/// Smooth cutoff: 1 at r ≤ 0, 0 at r ≥ 1.
fn smooth_step(r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let e = |x: f64| (-1.0 / x).exp();
    let a = e(1.0 - r);
    a / (a + e(r))
}

fn bump(u: f64, width: f64) -> f64 {
    smooth_step(u.abs() / width)
}

/// Data for one sampled time.
#[derive(Clone)]
pub struct MoserSlice {
    pub t: f64,
    /// ρ₀ = det Dχ with χ = φ ∘ h_t.
    density: PeriodicGrid,
    /// α̃ = ã dx + b̃ dy after removing a(x, π) dx.
    alpha_dx: PeriodicGrid,
    alpha_dy: PeriodicGrid,
    pub poisson_residual: f64,
    pub min_density: f64,
    /// Mean of ρ₀ − 1 removed before the Poisson solve.
    pub removed_mean: f64,
    /// max |ã| along y = π at grid nodes.
    pub tangency_defect: f64,
}

/// Summary of the self-checks of a corrected isotopy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoserChecks {
    pub times: Vec<f64>,
    /// max |det Dψ − 1| per time on the grid.
    pub area_defect: Vec<f64>,
    /// Hausdorff distance between ψ(t, c) and φ(t, c) per time.
    pub hausdorff: Vec<f64>,
    /// max ‖ψ(t, −p) + ψ(t, p)‖ when the input is equivariant.
    pub equivariance_defect: Option<f64>,
    pub max_poisson_residual: f64,
    pub min_density: f64,
    pub passed: bool,
}

/// An area-preserving correction ψ of an isotopy φ, sampled at uniform times.
#[derive(Clone)]
pub struct MoserResult {
    phi: Isotopy,
    pub options: MoserOptions,
    pub slices: Vec<MoserSlice>,
}

impl fmt::Debug for MoserResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MoserResult")
            .field("options", &self.options)
            .field("times", &self.times())
            .finish_non_exhaustive()
    }
}

fn rescale_factor(phi: &Isotopy, t: f64, x: f64, h: f64) -> f64 {
    let j = fd_jacobian(|p| phi(t, p), [x, PI], h);
    1.0 / (j[0][0] * j[1][1] - j[0][1] * j[1][0])
}

/// h_t(x, y) = (x, y + u·(a_t(x) − 1)·B(u)) with u = y − π wrapped.
fn rescale(phi: &Isotopy, t: f64, p: [f64; 2], width: f64, h: f64) -> [f64; 2] {
    let u = wrap_signed(p[1] - PI);
    let b = bump(u, width);
    if b == 0.0 {
        return p;
    }
    let a = rescale_factor(phi, t, p[0], h);
    [p[0], p[1] + u * (a - 1.0) * b]
}

impl MoserResult {
    pub fn times(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.t).collect()
    }

    /// χ_t = φ_t ∘ h_t on a lifted point.
    pub fn rescaled(&self, k: usize, p: [f64; 2]) -> [f64; 2] {
        let t = self.slices[k].t;
        let o = &self.options;
        (self.phi)(t, rescale(&self.phi, t, p, o.bump_width, o.fd_step))
    }

    fn velocity(&self, k: usize, s: f64, p: [f64; 2]) -> [f64; 2] {
        let sl = &self.slices[k];
        let rho = s + (1.0 - s) * sl.density.eval(p);
        [sl.alpha_dy.eval(p) / rho, -sl.alpha_dx.eval(p) / rho]
    }

    /// Time-one map of the correcting flow.
    pub fn correction(&self, k: usize, p: [f64; 2]) -> [f64; 2] {
        let n = self.options.s_steps.max(1);
        let ds = 1.0 / n as f64;
        let f = |s: f64, q: [f64; 2]| self.velocity(k, s, q);
        let mut q = p;
        for i in 0..n {
            q = rk4_step(&f, i as f64 * ds, q, ds);
        }
        q
    }

    /// Inverse of [`correction`](Self::correction) by backward integration.
    pub fn correction_inverse(&self, k: usize, q: [f64; 2]) -> [f64; 2] {
        let n = self.options.s_steps.max(1);
        let ds = 1.0 / n as f64;
        let f = |s: f64, p: [f64; 2]| self.velocity(k, s, p);
        let mut p = q;
        for i in (0..n).rev() {
            p = rk4_step(&f, (i + 1) as f64 * ds, p, -ds);
        }
        p
    }

    /// ψ at the k-th sampled time: χ ∘ (φ₁)⁻¹.
    pub fn eval(&self, k: usize, q: [f64; 2]) -> [f64; 2] {
        self.rescaled(k, self.correction_inverse(k, q))
    }

    pub fn input(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        (self.phi)(t, p)
    }

    /// Runs the area, curve and symmetry checks on the M×M grid.
    pub fn check(&self) -> MoserChecks {
        let o = self.options;
        let m = o.grid;
        let mut area_defect = Vec::new();
        let mut hausdorff = Vec::new();
        let mut eq: Option<f64> = if o.equivariant { Some(0.0) } else { None };
        for k in 0..self.slices.len() {
            let t = self.slices[k].t;
            let defect = (0..m * m)
                .into_par_iter()
                .map(|idx| {
                    let p = grid_point(idx / m, idx % m, m);
                    let j = fd_jacobian(|q| self.eval(k, q), p, 1e-4);
                    (j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs()
                })
                .reduce(|| 0.0, f64::max);
            area_defect.push(defect);
            let samples = 4 * m;
            let xs: Vec<f64> = (0..samples).map(|i| TAU * i as f64 / samples as f64).collect();
            let a: Vec<[f64; 2]> = xs.par_iter().map(|&x| self.eval(k, [x, PI])).collect();
            let b: Vec<[f64; 2]> = xs.iter().map(|&x| (self.phi)(t, [x, PI])).collect();
            hausdorff.push(curve_hausdorff(&a, &b));
            if let Some(e) = eq.as_mut() {
                let d = (0..m * m)
                    .into_par_iter()
                    .map(|idx| {
                        let p = grid_point(idx / m, idx % m, m);
                        let x = self.eval(k, p);
                        let y = self.eval(k, [-p[0], -p[1]]);
                        (x[0] + y[0]).hypot(x[1] + y[1])
                    })
                    .reduce(|| 0.0, f64::max);
                *e = e.max(d);
            }
        }
        let max_poisson_residual = self
            .slices
            .iter()
            .map(|s| s.poisson_residual)
            .fold(0.0, f64::max);
        let min_density = self
            .slices
            .iter()
            .map(|s| s.min_density)
            .fold(f64::INFINITY, f64::min);
        let passed = area_defect.iter().all(|&d| d <= o.area_tol)
            && hausdorff.iter().all(|&d| d <= o.curve_tol)
            && eq.map_or(true, |e| e <= 1e-8);
        MoserChecks {
            times: self.times(),
            area_defect,
            hausdorff,
            equivariance_defect: eq,
            max_poisson_residual,
            min_density,
            passed,
        }
    }
}

fn point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - s * d[0]).hypot(p[1] - a[1] - s * d[1])
}

/// One-sided distance from points to a closed lifted curve (period (2π, 0)),
/// accounting for lattice translates.
fn directed(points: &[[f64; 2]], curve: &[[f64; 2]]) -> f64 {
    let n = curve.len();
    let mut ext = Vec::with_capacity(3 * n + 1);
    for shift in [-TAU, 0.0, TAU] {
        ext.extend(curve.iter().map(|c| [c[0] + shift, c[1]]));
    }
    ext.push([curve[0][0] + 2.0 * TAU, curve[0][1]]);
    points
        .par_iter()
        .map(|p| {
            // compare against the translate closest in y
            let mut best = f64::INFINITY;
            for dy in [-TAU, 0.0, TAU] {
                let q = [p[0], p[1] + dy];
                for w in ext.windows(2) {
                    best = best.min(point_segment(q, w[0], w[1]));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between two sampled closed curves that are graphs of
/// lifted maps of the circle {y = π}.
pub fn curve_hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    directed(a, b).max(directed(b, a))
}

/// Corrects an isotopy φ (acting on lifts, φ(0, ·) = id) to an
/// area-preserving isotopy ψ with ψ(t, c) = φ(t, c) as sets for the curve
/// c = {y = π}.
pub fn moser_correct(phi: Isotopy, opts: MoserOptions) -> Result<MoserResult, MoserError> {
    let m = opts.grid;
    if m < 8 || m % 2 != 0 {
        return Err(MoserError::BadGrid);
    }
    if opts.time_samples < 2 {
        return Err(MoserError::TooFewSamples);
    }
    let mut dev0: f64 = 0.0;
    for idx in 0..m * m {
        let p = grid_point(idx / m, idx % m, m);
        let q = phi(0.0, p);
        dev0 = dev0.max((q[0] - p[0]).hypot(q[1] - p[1]));
    }
    if dev0 > 1e-9 {
        return Err(MoserError::NotIdentityAtZero(dev0));
    }
    let times: Vec<f64> = (0..opts.time_samples)
        .map(|k| k as f64 / (opts.time_samples - 1) as f64)
        .collect();
    let slices = times
        .iter()
        .map(|&t| solve_slice(&phi, t, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MoserResult {
        phi,
        options: opts,
        slices,
    })
}

fn solve_slice(phi: &Isotopy, t: f64, o: &MoserOptions) -> Result<MoserSlice, MoserError> {
    let m = o.grid;
    let h = o.fd_step;
    let chi = |p: [f64; 2]| phi(t, rescale(phi, t, p, o.bump_width, h));
    let mut rho: Vec<f64> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let j = fd_jacobian(chi, grid_point(idx / m, idx % m, m), h);
            j[0][0] * j[1][1] - j[0][1] * j[1][0]
        })
        .collect();
    if o.equivariant {
        // project onto the even part, i.e. the cosine (τ-invariant) basis
        let orig = rho.clone();
        for i in 0..m {
            for j in 0..m {
                let mi = (m - i) % m;
                let mj = (m - j) % m;
                rho[i * m + j] = 0.5 * (orig[i * m + j] + orig[mi * m + mj]);
            }
        }
    }
    let min_density = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_density >= o.form_floor) {
        return Err(MoserError::DegenerateForm {
            t,
            density: min_density,
            floor: o.form_floor,
        });
    }
    let rhs: Vec<f64> = rho.iter().map(|r| r - 1.0).collect();
    let (g, removed_mean) = spectral::poisson(&rhs, m);
    let lap = spectral::laplacian(&g, m);
    let poisson_residual = lap
        .iter()
        .zip(&rhs)
        .map(|(l, r)| (l - (r - removed_mean)).abs())
        .fold(0.0, f64::max);
    if poisson_residual > o.poisson_tol {
        return Err(MoserError::PoissonFailed {
            t,
            residual: poisson_residual,
            tol: o.poisson_tol,
        });
    }
    let (gx, gy) = spectral::gradient(&g, m);
    // α = −g_y dx + g_x dy satisfies dα = Δg dx∧dy = (ρ₀ − 1) dx∧dy
    let c_row = m / 2;
    let mut adx = vec![0.0; m * m];
    for i in 0..m {
        let on_c = gy[i * m + c_row];
        for j in 0..m {
            adx[i * m + j] = -gy[i * m + j] + on_c;
        }
    }
    let tangency_defect = (0..m).map(|i| adx[i * m + c_row].abs()).fold(0.0, f64::max);
    let u = o.upsample.max(1);
    let mu = m * u;
    let mut adx_f = spectral::upsample(&adx, m, u);
    let ady_f = spectral::upsample(&gx, m, u);
    let rho_f = spectral::upsample(&rho, m, u);
    let fine_row = mu / 2;
    for i in 0..mu {
        adx_f[i * mu + fine_row] = 0.0;
    }
    Ok(MoserSlice {
        t,
        density: PeriodicGrid::new(mu, rho_f),
        alpha_dx: PeriodicGrid::new(mu, adx_f),
        alpha_dy: PeriodicGrid::new(mu, ady_f),
        poisson_residual,
        min_density,
        removed_mean,
        tangency_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(-0.5), 1.0);
        assert_eq!(smooth_step(0.0), 1.0);
        assert_eq!(smooth_step(1.0), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn translation_is_reproduced() {
        let phi: Isotopy = Arc::new(|t, p| [p[0] + t, p[1]]);
        let opts = MoserOptions {
            grid: 16,
            time_samples: 3,
            ..MoserOptions::default()
        };
        let r = moser_correct(phi.clone(), opts).unwrap();
        for k in 0..3 {
            let t = r.slices[k].t;
            for p in [[0.3, 0.1], [2.0, PI], [5.0, 4.0]] {
                let a = r.eval(k, p);
                let b = phi(t, p);
                assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn collapsing_isotopy_is_degenerate() {
        let phi: Isotopy = Arc::new(|t, p| [p[0] + 0.95 * t * p[0].sin(), p[1]]);
        let opts = MoserOptions {
            grid: 16,
            time_samples: 3,
            ..MoserOptions::default()
        };
        assert!(matches!(
            moser_correct(phi, opts),
            Err(MoserError::DegenerateForm { .. })
        ));
    }
}
