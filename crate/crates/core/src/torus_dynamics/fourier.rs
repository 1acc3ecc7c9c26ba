use super::profile::ShearingProfile;
use super::shear::{gcd, ShearingMap};
use super::spectral;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("grid resolution {n} is below 4K = {}", 4 * .k)]
    GridTooCoarse { n: usize, k: usize },
    #[error("projection residual {residual:.3e} exceeds div_tol {tol:.1e} at k = {k:?}")]
    DivergenceTooLarge { residual: f64, tol: f64, k: [i64; 2] },
    #[error("field declared equivariant has even part of size {residual:.3e}")]
    EquivarianceBroken { residual: f64 },
    #[error("sample count {got} does not match an {n}x{n} grid")]
    BadSamples { got: usize, n: usize },
    #[error("wavevector must be nonzero")]
    ZeroWavevector,
}

/// Representative of ±k whose first nonzero entry is positive.
pub fn lex_positive(k: [i64; 2]) -> [i64; 2] {
    if k[0] > 0 || (k[0] == 0 && k[1] > 0) {
        k
    } else {
        [-k[0], -k[1]]
    }
}

/// One divergence-free Fourier term sin(k·p)·u_sin + cos(k·p)·u_cos.
///
/// The amplitudes are stored along the primitive direction v = k̄/gcd(k),
/// k̄ = (−k₂, k₁), so u·k = 0 holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub k: [i64; 2],
    pub amp_sin: f64,
    #[serde(default)]
    pub amp_cos: f64,
}

impl FourierTerm {
    pub fn multiplicity(&self) -> i64 {
        gcd(self.k[0], self.k[1])
    }

    pub fn normal(&self) -> [i64; 2] {
        let g = self.multiplicity();
        [self.k[0] / g, self.k[1] / g]
    }

    pub fn direction(&self) -> [i64; 2] {
        let w = self.normal();
        [-w[1], w[0]]
    }

    pub fn u_sin(&self) -> [f64; 2] {
        let v = self.direction();
        [self.amp_sin * v[0] as f64, self.amp_sin * v[1] as f64]
    }

    pub fn u_cos(&self) -> [f64; 2] {
        let v = self.direction();
        [self.amp_cos * v[0] as f64, self.amp_cos * v[1] as f64]
    }

    pub fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        let phase = self.k[0] as f64 * p[0] + self.k[1] as f64 * p[1];
        let s = self.amp_sin * phase.sin() + self.amp_cos * phase.cos();
        let v = self.direction();
        [s * v[0] as f64, s * v[1] as f64]
    }

    /// The same field written as a shearing map with profile in l = ⟨p, w⟩.
    pub fn to_shear(&self) -> ShearingMap {
        let g = self.multiplicity() as u32;
        let mut profile = ShearingProfile::zero();
        if self.amp_sin != 0.0 {
            profile.sine.push((g, self.amp_sin));
        }
        if self.amp_cos != 0.0 {
            profile.cosine.push((g, self.amp_cos));
        }
        ShearingMap::along_normal(self.normal(), profile).expect("normal is primitive")
    }
}

/// A finite divergence-free Fourier field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierField {
    pub terms: Vec<FourierTerm>,
    #[serde(default)]
    pub constant: [f64; 2],
    #[serde(default)]
    pub equivariant: bool,
}

impl FourierField {
    /// Builds a field from vector coefficients, normalising k to its
    /// lex-positive representative and checking u ⟂ k.
    pub fn from_coefficients(
        coeffs: &[([i64; 2], [f64; 2], [f64; 2])],
        constant: [f64; 2],
        tol: f64,
    ) -> Result<Self, FourierError> {
        let mut terms = Vec::new();
        for &(k, us, uc) in coeffs {
            if k == [0, 0] {
                return Err(FourierError::ZeroWavevector);
            }
            let kp = lex_positive(k);
            // sin(−k·p) = −sin(k·p); cos is even
            let sign = if kp == k { 1.0 } else { -1.0 };
            let t = project(kp, [sign * us[0], sign * us[1]], uc, tol)?;
            terms.push(t.0);
        }
        let equivariant = terms.iter().all(|t| t.amp_cos == 0.0) && constant == [0.0, 0.0];
        let mut f = FourierField {
            terms,
            constant,
            equivariant,
        };
        f.normalize();
        Ok(f)
    }

    fn normalize(&mut self) {
        self.terms.sort_by_key(|t| t.k);
        let mut merged: Vec<FourierTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.k == t.k => {
                    last.amp_sin += t.amp_sin;
                    last.amp_cos += t.amp_cos;
                }
                _ => merged.push(t),
            }
        }
        self.terms = merged;
    }

    pub fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        let mut out = self.constant;
        for t in &self.terms {
            let w = t.eval(p);
            out[0] += w[0];
            out[1] += w[1];
        }
        out
    }

    /// The shearing fields whose sum is this field, constant parts first.
    pub fn to_shears(&self) -> Vec<ShearingMap> {
        let mut maps = Vec::new();
        if self.constant[0] != 0.0 {
            maps.push(ShearingMap {
                v: [1, 0],
                w: [0, 1],
                profile: ShearingProfile::constant(self.constant[0]),
            });
        }
        if self.constant[1] != 0.0 {
            maps.push(ShearingMap {
                v: [0, 1],
                w: [1, 0],
                profile: ShearingProfile::constant(self.constant[1]),
            });
        }
        maps.extend(self.terms.iter().map(FourierTerm::to_shear));
        maps
    }

    pub fn max_wavenumber(&self) -> i64 {
        self.terms
            .iter()
            .map(|t| t.k[0].abs().max(t.k[1].abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Projects coefficient vectors onto k̄; returns the term and the residual.
fn project(
    k: [i64; 2],
    us: [f64; 2],
    uc: [f64; 2],
    tol: f64,
) -> Result<(FourierTerm, f64), FourierError> {
    let tmp = FourierTerm {
        k,
        amp_sin: 0.0,
        amp_cos: 0.0,
    };
    let v = tmp.direction().map(|a| a as f64);
    let vv = v[0] * v[0] + v[1] * v[1];
    let a = (us[0] * v[0] + us[1] * v[1]) / vv;
    let b = (uc[0] * v[0] + uc[1] * v[1]) / vv;
    let rs = (us[0] - a * v[0]).hypot(us[1] - a * v[1]);
    let rc = (uc[0] - b * v[0]).hypot(uc[1] - b * v[1]);
    let residual = rs.max(rc);
    if residual > tol {
        return Err(FourierError::DivergenceTooLarge {
            residual,
            tol,
            k,
        });
    }
    Ok((
        FourierTerm {
            k,
            amp_sin: a,
            amp_cos: b,
        },
        residual,
    ))
}

/// Field samples on the uniform n×n grid, row-major in x.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    pub n: usize,
    pub values: Vec<[f64; 2]>,
}

impl GridSamples {
    pub fn from_fn(n: usize, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(super::point::grid_point(i, j, n)));
            }
        }
        Self { n, values }
    }
}

/// Output of [`fourier_decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub field: FourierField,
    /// Largest distance of a raw coefficient vector from the line R·k̄.
    pub projection_residual: f64,
    /// Largest even (cosine or constant) coefficient, for equivariant input.
    pub symmetry_residual: f64,
    /// Grid sup of the samples minus the truncated field.
    pub truncation_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    pub div_tol: f64,
    /// Coefficients with magnitude at or below this are dropped.
    pub coeff_floor: f64,
    pub equivariant: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            div_tol: 1e-8,
            coeff_floor: 1e-13,
            equivariant: false,
        }
    }
}

/// Truncated Fourier decomposition with |k₁|, |k₂| ≤ `k_max` by trapezoid
/// quadrature, u_k = 1/(2π²) ∫ X sin(k·p), evaluated with one complex FFT.
pub fn fourier_decompose(
    samples: &GridSamples,
    k_max: usize,
    opts: DecomposeOptions,
) -> Result<Decomposition, FourierError> {
    let n = samples.n;
    if samples.values.len() != n * n {
        return Err(FourierError::BadSamples {
            got: samples.values.len(),
            n,
        });
    }
    if n < 4 * k_max {
        return Err(FourierError::GridTooCoarse { n, k: k_max });
    }
    let mut data: Vec<Complex64> = samples
        .values
        .iter()
        .map(|v| Complex64::new(v[0], v[1]))
        .collect();
    spectral::fft2(&mut data, n, false);
    let norm = 2.0 / (n * n) as f64;
    // separate the transforms of the two real components
    let split = |k: [i64; 2]| -> ([f64; 2], [f64; 2]) {
        let z = data[spectral::index(k[0], n) * n + spectral::index(k[1], n)];
        let zc = data[spectral::index(-k[0], n) * n + spectral::index(-k[1], n)].conj();
        let a = (z + zc) * 0.5;
        let b = (z - zc) * Complex64::new(0.0, -0.5);
        // X̂(k) = (n²/2)(u_cos − i u_sin)
        ([-a.im * norm, -b.im * norm], [a.re * norm, b.re * norm])
    };
    let mut projection_residual: f64 = 0.0;
    let mut symmetry_residual: f64 = 0.0;
    let mut terms = Vec::new();
    let km = k_max as i64;
    for k1 in 0..=km {
        for k2 in -km..=km {
            let k = [k1, k2];
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let (mut us, mut uc) = split(k);
            if opts.equivariant {
                symmetry_residual = symmetry_residual.max(uc[0].hypot(uc[1]));
                uc = [0.0, 0.0];
            }
            if us[0].hypot(us[1]) <= opts.coeff_floor {
                us = [0.0, 0.0];
            }
            if uc[0].hypot(uc[1]) <= opts.coeff_floor {
                uc = [0.0, 0.0];
            }
            let (t, r) = project(k, us, uc, opts.div_tol)?;
            projection_residual = projection_residual.max(r);
            if t.amp_sin != 0.0 || t.amp_cos != 0.0 {
                terms.push(t);
            }
        }
    }
    let mut constant = [data[0].re / (n * n) as f64, data[0].im / (n * n) as f64];
    if opts.equivariant {
        symmetry_residual = symmetry_residual.max(constant[0].hypot(constant[1]));
        constant = [0.0, 0.0];
    }
    for c in constant.iter_mut() {
        if c.abs() <= opts.coeff_floor {
            *c = 0.0;
        }
    }
    if opts.equivariant && symmetry_residual > opts.div_tol {
        return Err(FourierError::EquivarianceBroken {
            residual: symmetry_residual,
        });
    }
    let field = FourierField {
        terms,
        constant,
        equivariant: opts.equivariant,
    };
    let mut truncation_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = super::point::grid_point(i, j, n);
            let z = field.eval(p);
            let x = samples.values[i * n + j];
            truncation_residual = truncation_residual.max((x[0] - z[0]).hypot(x[1] - z[1]));
        }
    }
    Ok(Decomposition {
        field,
        projection_residual,
        symmetry_residual,
        truncation_residual,
    })
}
