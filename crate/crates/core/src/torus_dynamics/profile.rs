use serde::{Deserialize, Serialize};

/// A 2π-periodic profile f(s) = Σ c_m sin(m s) + Σ d_m cos(m s).
///
/// Equivariant profiles carry no cosine terms, so they are odd by
/// construction.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearingProfile {
    /// Pairs (m, c_m) with m ≥ 1.
    #[serde(default)]
    pub sine: Vec<(u32, f64)>,
    /// Pairs (m, d_m) with m ≥ 0.
    #[serde(default)]
    pub cosine: Vec<(u32, f64)>,
}

impl ShearingProfile {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn sine(m: u32, c: f64) -> Self {
        Self {
            sine: vec![(m, c)],
            cosine: Vec::new(),
        }
    }

    pub fn cosine(m: u32, d: f64) -> Self {
        Self {
            sine: Vec::new(),
            cosine: vec![(m, d)],
        }
    }

    pub fn constant(d: f64) -> Self {
        Self::cosine(0, d)
    }

    pub fn is_odd(&self) -> bool {
        self.cosine.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.sine.iter().all(|&(_, c)| c == 0.0) && self.cosine.iter().all(|&(_, d)| d == 0.0)
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        let mut f = 0.0;
        for &(m, c) in &self.sine {
            f += c * (m as f64 * s).sin();
        }
        for &(m, d) in &self.cosine {
            f += if m == 0 { d } else { d * (m as f64 * s).cos() };
        }
        f
    }

    #[inline]
    pub fn derivative(&self, s: f64) -> f64 {
        let mut f = 0.0;
        for &(m, c) in &self.sine {
            let m = m as f64;
            f += c * m * (m * s).cos();
        }
        for &(m, d) in &self.cosine {
            let m = m as f64;
            f -= d * m * (m * s).sin();
        }
        f
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            sine: self.sine.iter().map(|&(m, c)| (m, c * factor)).collect(),
            cosine: self.cosine.iter().map(|&(m, d)| (m, d * factor)).collect(),
        }
    }

    /// The profile s ↦ f(−s).
    pub fn reflected(&self) -> Self {
        Self {
            sine: self.sine.iter().map(|&(m, c)| (m, -c)).collect(),
            cosine: self.cosine.clone(),
        }
    }

    /// Bound on sup |f|.
    pub fn sup_bound(&self) -> f64 {
        self.sine.iter().map(|&(_, c)| c.abs()).sum::<f64>()
            + self.cosine.iter().map(|&(_, d)| d.abs()).sum::<f64>()
    }

    /// Bound on sup |f′|.
    pub fn derivative_bound(&self) -> f64 {
        self.sine.iter().map(|&(m, c)| c.abs() * m as f64).sum::<f64>()
            + self.cosine.iter().map(|&(m, d)| d.abs() * m as f64).sum::<f64>()
    }

    /// Bound on sup |f″|.
    pub fn second_derivative_bound(&self) -> f64 {
        let sq = |m: u32| (m as f64) * (m as f64);
        self.sine.iter().map(|&(m, c)| c.abs() * sq(m)).sum::<f64>()
            + self.cosine.iter().map(|&(m, d)| d.abs() * sq(m)).sum::<f64>()
    }
}

/// Antiderivative data g with g′ = f: a cosine/sine series with zero constant
/// term plus a linear drift coming from a constant term of f.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Antiderivative {
    /// Pairs (m, e_m): terms e_m cos(m s), m ≥ 1.
    pub cosine: Vec<(u32, f64)>,
    /// Pairs (m, e_m): terms e_m sin(m s), m ≥ 1.
    pub sine: Vec<(u32, f64)>,
    /// Coefficient of the linear term drift·s.
    pub drift: f64,
}

impl Antiderivative {
    pub fn of(f: &ShearingProfile) -> Self {
        let mut g = Antiderivative::default();
        for &(m, c) in &f.sine {
            g.cosine.push((m, -c / m as f64));
        }
        for &(m, d) in &f.cosine {
            if m == 0 {
                g.drift += d;
            } else {
                g.sine.push((m, d / m as f64));
            }
        }
        g
    }

    pub fn eval(&self, s: f64) -> f64 {
        let mut g = self.drift * s;
        for &(m, e) in &self.cosine {
            g += e * (m as f64 * s).cos();
        }
        for &(m, e) in &self.sine {
            g += e * (m as f64 * s).sin();
        }
        g
    }

    /// Recovers f = g′.
    pub fn derivative_profile(&self) -> ShearingProfile {
        let mut f = ShearingProfile::zero();
        for &(m, e) in &self.cosine {
            f.sine.push((m, -e * m as f64));
        }
        for &(m, e) in &self.sine {
            f.cosine.push((m, e * m as f64));
        }
        if self.drift != 0.0 {
            f.cosine.push((0, self.drift));
        }
        f
    }
}
