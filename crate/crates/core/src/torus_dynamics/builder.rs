use super::field::{estimate_lipschitz, fd_jacobian, op_norm, TimeField, SAFETY_FACTOR};
use super::flow::{rk4_trajectory, splitting_constant};
use super::fourier::{fourier_decompose, DecomposeOptions, FourierError, FourierField};
use super::point::{grid_point, torus_distance};
use super::program::{Segment, ShearingProgram};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("stage {stage} infeasible within caps: best bound {best:.3e} vs target {target:.3e}")]
    BudgetInfeasible { stage: u8, best: f64, target: f64 },
    #[error("eps must be positive")]
    NonPositiveEps,
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// Overrides and caps for the stage parameter searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BuildParams {
    pub n: Option<usize>,
    pub truncation: Option<usize>,
    pub fineness: Option<u64>,
    pub max_n: usize,
    pub max_truncation: usize,
    pub max_fineness: u64,
    /// Sub-samples per slice when measuring the time modulus.
    pub time_subsamples: usize,
    pub div_tol: f64,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            n: None,
            truncation: None,
            fineness: None,
            max_n: 1024,
            max_truncation: 64,
            max_fineness: 1 << 20,
            time_subsamples: 4,
            div_tol: 1e-8,
        }
    }
}

/// Measured data for one time slice [j/n, (j+1)/n].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceData {
    pub index: usize,
    /// sup over the slice and grid of ‖X_s − X_j‖ (×1.1).
    pub time_modulus: f64,
    pub truncation_radius: usize,
    /// Grid sup of ‖X_j − Z_j‖ on the staggered grid (×1.1).
    pub truncation_error: f64,
    pub term_count: usize,
    pub fineness: u64,
    /// S_j = ‖Z_j‖ + Σ‖W_r‖.
    pub step_sup: f64,
    /// Splitting constant C_j.
    pub splitting_constant: f64,
}

/// The three-stage C⁰ error budget of a shearing program.
///
/// Norms and the Lipschitz constant are grid estimates inflated by
/// `safety_factor`; the bound is numerical, not formally verified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCertificate {
    pub eps: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub total: f64,
    pub lipschitz_l: f64,
    pub n: usize,
    pub safety_factor: f64,
    pub slices: Vec<SliceData>,
}

impl ErrorCertificate {
    /// Recomputes the stage bounds from the stored measurements.
    pub fn recompute(&self) -> (f64, f64, f64) {
        let n = self.n as f64;
        let el = self.lipschitz_l.exp();
        let eps1 = el * self.slices.iter().map(|s| s.time_modulus).sum::<f64>() / n;
        let eps2 = el * self.slices.iter().map(|s| s.truncation_error).sum::<f64>() / n;
        let eps3 = el
            * self
                .slices
                .iter()
                .map(|s| stage3_term(s, n, self.lipschitz_l))
                .sum::<f64>();
        (eps1, eps2, eps3)
    }
}

fn stage3_term(s: &SliceData, n: f64, l: f64) -> f64 {
    if s.term_count < 2 {
        return 0.0;
    }
    let k = s.fineness as f64;
    s.step_sup / (k * n) + s.splitting_constant * (l / (k * n)).exp() / (k * n * n)
}

fn staggered_sup(n: usize, f: impl Fn([f64; 2]) -> f64) -> f64 {
    let h = TAU / n as f64;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max(f([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]));
        }
    }
    worst
}

fn truncate(field: &FourierField, k: usize) -> FourierField {
    let k = k as i64;
    FourierField {
        terms: field
            .terms
            .iter()
            .copied()
            .filter(|t| t.k[0].abs() <= k && t.k[1].abs() <= k)
            .collect(),
        constant: field.constant,
        equivariant: field.equivariant,
    }
}

fn time_modulus(field: &TimeField, n: usize, j: usize, q: usize) -> f64 {
    let t0 = j as f64 / n as f64;
    let g = field.grid;
    let base: Vec<[f64; 2]> = (0..g * g)
        .map(|idx| field.eval(t0, grid_point(idx / g, idx % g, g)))
        .collect();
    let mut worst: f64 = 0.0;
    for r in 1..=q {
        let t = t0 + r as f64 / (q as f64 * n as f64);
        for (idx, b) in base.iter().enumerate() {
            let x = field.eval(t, grid_point(idx / g, idx % g, g));
            worst = worst.max((x[0] - b[0]).hypot(x[1] - b[1]));
        }
    }
    worst * SAFETY_FACTOR
}

struct Stage2 {
    z: FourierField,
    k: usize,
    err: f64,
}

fn stage2(field: &TimeField, t: f64, target: f64, params: &BuildParams) -> Result<Stage2, BuildError> {
    let n = field.grid;
    let cap = params.max_truncation.min(n / 4).max(1);
    let samples = field.samples_at(t);
    let opts = DecomposeOptions {
        div_tol: params.div_tol,
        equivariant: field.equivariant,
        ..DecomposeOptions::default()
    };
    let full = fourier_decompose(&samples, cap, opts)?.field;
    let measure = |z: &FourierField| {
        staggered_sup(n, |p| {
            let a = field.eval(t, p);
            let b = z.eval(p);
            (a[0] - b[0]).hypot(a[1] - b[1])
        }) * SAFETY_FACTOR
    };
    if let Some(k) = params.truncation {
        let z = truncate(&full, k.min(cap));
        let err = measure(&z);
        return Ok(Stage2 { z, k, err });
    }
    let mut best = f64::INFINITY;
    for k in 1..=cap {
        let z = truncate(&full, k);
        let err = measure(&z);
        if err <= target {
            return Ok(Stage2 { z, k, err });
        }
        best = best.min(err);
    }
    Err(BuildError::BudgetInfeasible {
        stage: 2,
        best,
        target,
    })
}

fn z_lipschitz(z: &FourierField, n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let jac = fd_jacobian(|p| z.eval(p), grid_point(i, j, n), 1e-5);
            worst = worst.max(op_norm(jac));
        }
    }
    worst * SAFETY_FACTOR
}

/// Builds a shearing program approximating the flow of `field` on [0, 1]
/// within `eps` in C⁰, together with its error certificate.
///
/// Stage 1 picks the number of slices n (doubling) so that the measured time
/// modulus of each slice is below (ε/3)/e^L; stage 2 picks per-slice Fourier
/// truncations Z_j with ‖X_j − Z_j‖ ≤ (ε/3)/e^L; stage 3 picks the fineness
/// k_j (doubling) so that the splitting bound is below ε/3.
pub fn build_shearing_program(
    field: &TimeField,
    eps: f64,
    params: &BuildParams,
) -> Result<(ShearingProgram, ErrorCertificate), BuildError> {
    if !(eps > 0.0) {
        return Err(BuildError::NonPositiveEps);
    }
    let third = eps / 3.0;
    let mut l = estimate_lipschitz(field);
    let q = params.time_subsamples.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        let target = third / l.exp();
        // stage 1
        let (n, moduli) = match params.n {
            Some(n) => (n, (0..n).map(|j| time_modulus(field, n, j, q)).collect::<Vec<_>>()),
            None => {
                let mut n = 1;
                loop {
                    let m: Vec<f64> = (0..n)
                        .into_par_iter()
                        .map(|j| time_modulus(field, n, j, q))
                        .collect();
                    let worst = m.iter().cloned().fold(0.0, f64::max);
                    if worst <= target {
                        break (n, m);
                    }
                    if n * 2 > params.max_n {
                        return Err(BuildError::BudgetInfeasible {
                            stage: 1,
                            best: worst,
                            target,
                        });
                    }
                    n *= 2;
                }
            }
        };
        // stage 2
        let truncs: Vec<Stage2> = (0..n)
            .into_par_iter()
            .map(|j| stage2(field, j as f64 / n as f64, target, params))
            .collect::<Result<_, _>>()?;
        let lz = truncs
            .par_iter()
            .map(|s| z_lipschitz(&s.z, field.grid))
            .reduce(|| 0.0, f64::max);
        if lz > l && attempt < 3 {
            l = lz;
            continue;
        }
        let l = l.max(lz);
        let el = l.exp();
        let nf = n as f64;
        // stage 3
        let slices: Vec<(SliceData, Segment)> = truncs
            .into_par_iter()
            .enumerate()
            .map(|(j, s)| {
                let maps = s.z.to_shears();
                let m = maps.len();
                let a_sum: f64 = maps.iter().map(|w| w.sup_bound()).sum();
                let (fineness, step_sup, c) = if m < 2 {
                    (1, a_sum, 0.0)
                } else {
                    let zs = (staggered_sup(field.grid, |p| {
                        let v = s.z.eval(p);
                        v[0].hypot(v[1])
                    }) * SAFETY_FACTOR)
                        .min(a_sum);
                    let step_sup = zs + a_sum;
                    let c = splitting_constant(&maps, field.grid).total();
                    let need = |k: u64| (step_sup + c * el / nf) * el / k as f64;
                    let k = match params.fineness {
                        Some(k) => k,
                        None => {
                            let mut k = 1u64;
                            while need(k) > third {
                                if k * 2 > params.max_fineness {
                                    return Err(BuildError::BudgetInfeasible {
                                        stage: 3,
                                        best: need(k),
                                        target: third,
                                    });
                                }
                                k *= 2;
                            }
                            k
                        }
                    };
                    (k, step_sup, c)
                };
                let data = SliceData {
                    index: j,
                    time_modulus: moduli[j],
                    truncation_radius: s.k,
                    truncation_error: s.err,
                    term_count: m,
                    fineness,
                    step_sup,
                    splitting_constant: c,
                };
                let seg = Segment {
                    start: j as f64 / nf,
                    end: (j + 1) as f64 / nf,
                    maps,
                    repeats: fineness,
                };
                Ok((data, seg))
            })
            .collect::<Result<_, BuildError>>()?;
        let (slices, segments): (Vec<_>, Vec<_>) = slices.into_iter().unzip();
        let mut cert = ErrorCertificate {
            eps,
            eps1: 0.0,
            eps2: 0.0,
            eps3: 0.0,
            total: 0.0,
            lipschitz_l: l,
            n,
            safety_factor: SAFETY_FACTOR,
            slices,
        };
        let (e1, e2, e3) = cert.recompute();
        cert.eps1 = e1;
        cert.eps2 = e2;
        cert.eps3 = e3;
        cert.total = e1 + e2 + e3;
        let program = ShearingProgram { segments };
        return Ok((program, cert));
    }
}

/// Program vs reference-flow comparison on a grid and a set of times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub grid: usize,
    pub times: Vec<f64>,
    /// Max deviation per sample time.
    pub per_time: Vec<f64>,
    pub max: f64,
}

/// One sampled trajectory point: (time, start point, program image,
/// reference image).
pub type TrajectorySample = (f64, [f64; 2], [f64; 2], [f64; 2]);

/// Measures sup ‖program(t, p) − φ_X^t(p)‖ over an `grid`×`grid` lattice and
/// the given times, with an RK4 reference flow of step at most `max_dt`.
pub fn measure_deviation(
    field: &TimeField,
    program: &ShearingProgram,
    grid: usize,
    times: &[f64],
    max_dt: f64,
) -> (DeviationReport, Vec<TrajectorySample>) {
    let f = field.function();
    let rows: Vec<Vec<TrajectorySample>> = (0..grid * grid)
        .into_par_iter()
        .map(|idx| {
            let p = grid_point(idx / grid, idx % grid, grid);
            let prog = program.eval_many_lift(times, p);
            let reference = rk4_trajectory(&*f, p, times, max_dt);
            times
                .iter()
                .zip(prog.into_iter().zip(reference))
                .map(|(&t, (a, b))| (t, p, a, b))
                .collect()
        })
        .collect();
    let mut per_time = vec![0.0f64; times.len()];
    let mut samples = Vec::with_capacity(grid * grid * times.len());
    for row in rows {
        for (r, s) in row.into_iter().enumerate() {
            per_time[r] = per_time[r].max(torus_distance(s.2, s.3));
            samples.push(s);
        }
    }
    let max = per_time.iter().cloned().fold(0.0, f64::max);
    (
        DeviationReport {
            grid,
            times: times.to_vec(),
            per_time,
            max,
        },
        samples,
    )
}

#[cfg(test)]
mod tests {
    use super::super::fourier::FourierTerm;
    use super::*;

    #[test]
    fn single_term_field_gives_one_exact_step() {
        let f = FourierField {
            terms: vec![FourierTerm {
                k: [1, 1],
                amp_sin: 0.4,
                amp_cos: 0.0,
            }],
            constant: [0.0, 0.0],
            equivariant: true,
        };
        let field = TimeField::autonomous(f, 32).with_time_samples(3);
        let (prog, cert) = build_shearing_program(&field, 0.05, &BuildParams::default()).unwrap();
        assert_eq!(prog.step_count(), 1);
        assert_eq!(cert.n, 1);
        assert!(cert.eps2 < 1e-12 && cert.eps3 == 0.0 && cert.eps1 == 0.0);
        let times = [0.0, 0.5, 1.0];
        let (rep, _) = measure_deviation(&field, &prog, 8, &times, 1e-3);
        assert!(rep.max <= 1e-10, "{}", rep.max);
    }

    #[test]
    fn certificate_recompute_is_consistent() {
        let field = TimeField::new(|_, p| [p[1].sin(), p[0].sin()], 32, true).with_time_samples(3);
        let (_, cert) = build_shearing_program(&field, 0.2, &BuildParams::default()).unwrap();
        let (a, b, c) = cert.recompute();
        assert_eq!((a, b, c), (cert.eps1, cert.eps2, cert.eps3));
        assert!((cert.total - (a + b + c)).abs() == 0.0);
        assert!(cert.total <= 0.2);
    }

    #[test]
    fn impossible_budget_is_reported() {
        let field = TimeField::new(|t, p| [(10.0 * t).sin() * p[1].sin(), 0.0], 16, true)
            .with_time_samples(3);
        let params = BuildParams {
            max_n: 2,
            ..BuildParams::default()
        };
        let e = build_shearing_program(&field, 1e-3, &params).unwrap_err();
        assert!(matches!(e, BuildError::BudgetInfeasible { stage: 1, .. }));
    }
}
