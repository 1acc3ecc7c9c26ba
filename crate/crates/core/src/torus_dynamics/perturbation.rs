use super::profile::{Antiderivative, ShearingProfile};
use super::program::ShearingProgram;
use super::shear::gcd;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbationError {
    #[error("direction {0:?} is not primitive")]
    NonPrimitiveDirection([i64; 2]),
    #[error("normal {w:?} is not ±(−b, a) for direction {v:?}")]
    BadNormal { v: [i64; 2], w: [i64; 2] },
}

/// One step of holonomy perturbation data at the coordinate level: a matrix
/// A = [[a, c], [b, d]] ∈ SL(2, Z) and the antiderivative g of the profile f.
///
/// The induced map is (α, β) ↦ (α, β) + f(−bα + aβ)·(a, b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationStep {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub profile_g: Antiderivative,
}

impl PerturbationStep {
    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn profile_f(&self) -> ShearingProfile {
        self.profile_g.derivative_profile()
    }

    /// Applies the step scaled by `fraction` ∈ [0, 1] to a lifted point.
    pub fn apply(&self, p: [f64; 2], fraction: f64) -> [f64; 2] {
        let f = self.profile_f();
        self.apply_with(&f, p, fraction)
    }

    fn apply_with(&self, f: &ShearingProfile, p: [f64; 2], fraction: f64) -> [f64; 2] {
        let (a, b) = (self.a as f64, self.b as f64);
        let s = fraction * f.eval(-b * p[0] + a * p[1]);
        [p[0] + s * a, p[1] + s * b]
    }

    /// The same map written as A∘χ_f∘A⁻¹ with χ_f(α, β) = (α + f(β), β).
    pub fn apply_conjugated(&self, p: [f64; 2]) -> [f64; 2] {
        let f = self.profile_f();
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        let u = [d * p[0] - c * p[1], -b * p[0] + a * p[1]];
        let u = [u[0] + f.eval(u[1]), u[1]];
        [a * u[0] + c * u[1], b * u[0] + d * u[1]]
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum() * a, a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        // a = q b + r  ⇒  g = x b + y r = y a + (x − q y) b
        let q = a.div_euclid(b);
        (g, y, x - q * y)
    }
}

/// Completes a primitive column (a, b) to [[a, c], [b, d]] ∈ SL(2, Z),
/// choosing |c| minimal, then d ≥ 0, then |d| minimal.
pub fn complete_sl2(a: i64, b: i64) -> Result<(i64, i64), PerturbationError> {
    if gcd(a, b) != 1 {
        return Err(PerturbationError::NonPrimitiveDirection([a, b]));
    }
    // ext_gcd gives x a + y b = 1; a d − b c = 1 ⇒ d = x, c = −y
    let (g, x, y) = ext_gcd(a, b);
    debug_assert_eq!(g, 1);
    let (c0, d0) = (-y, x);
    let key = |t: i64| {
        let (c, d) = (c0 + t * a, d0 + t * b);
        (c.abs(), d < 0, d.abs())
    };
    let centre = if a != 0 {
        -(c0 as f64) / a as f64
    } else {
        -(d0 as f64) / b as f64
    };
    let t0 = centre.round() as i64;
    let best = (t0 - 2..=t0 + 2).min_by_key(|&t| key(t)).expect("non-empty range");
    Ok((c0 + best * a, d0 + best * b))
}

/// Converts every step of a program into perturbation data. The profile of
/// each step is scaled by duration·speed so the full step is reproduced.
pub fn program_to_perturbation(
    program: &ShearingProgram,
) -> Result<Vec<PerturbationStep>, PerturbationError> {
    let mut out = Vec::with_capacity(program.step_count() as usize);
    for step in program.steps() {
        let [a, b] = step.map.v;
        let (c, d) = complete_sl2(a, b)?;
        let f = step.map.profile.scaled(step.scale());
        let f = if step.map.w == [-b, a] {
            f
        } else if step.map.w == [b, -a] {
            f.reflected()
        } else {
            return Err(PerturbationError::BadNormal {
                v: step.map.v,
                w: step.map.w,
            });
        };
        out.push(PerturbationStep {
            a,
            b,
            c,
            d,
            profile_g: Antiderivative::of(&f),
        });
    }
    Ok(out)
}

/// Composite coordinate map at time t on the uniform schedule of N steps:
/// steps 0..k−1 in full, then step k at fraction N(t − k/N).
pub fn perturbation_to_map(steps: &[PerturbationStep], t: f64, p: [f64; 2]) -> [f64; 2] {
    let n = steps.len();
    if n == 0 {
        return p;
    }
    let t = t.clamp(0.0, 1.0);
    let u = t * n as f64;
    let k = (u.floor() as usize).min(n);
    let mut q = p;
    for s in &steps[..k] {
        q = s.apply(q, 1.0);
    }
    if k < n {
        let frac = u - k as f64;
        if frac > 0.0 {
            q = steps[k].apply(q, frac);
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::super::shear::ShearingMap;
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn completion_examples() {
        assert_eq!(complete_sl2(1, 0).unwrap(), (0, 1));
        assert_eq!(complete_sl2(2, 3).unwrap(), (1, 2));
        assert_eq!(complete_sl2(0, 1).unwrap(), (-1, 0));
        assert!(complete_sl2(2, 4).is_err());
        for (a, b) in [(5, 3), (-3, 7), (4, -9), (-1, -1), (13, 8)] {
            let (c, d) = complete_sl2(a, b).unwrap();
            assert_eq!(a * d - b * c, 1);
        }
    }

    #[test]
    fn identity_matrix_step() {
        let m = ShearingMap::new([1, 0], [0, 1], ShearingProfile::sine(1, 1.0)).unwrap();
        let steps = program_to_perturbation(&ShearingProgram::single(m)).unwrap();
        assert_eq!((steps[0].a, steps[0].b, steps[0].c, steps[0].d), (1, 0, 0, 1));
        let q = perturbation_to_map(&steps, 1.0, [0.0, FRAC_PI_2]);
        assert!((q[0] - 1.0).abs() < 1e-15 && (q[1] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(perturbation_to_map(&steps, 0.0, [0.3, 0.4]), [0.3, 0.4]);
    }

    #[test]
    fn conjugated_form_agrees() {
        let m = ShearingMap::new([2, 3], [3, -2], ShearingProfile::sine(1, 0.3)).unwrap();
        let steps = program_to_perturbation(&ShearingProgram::single(m.clone())).unwrap();
        for p in [[0.1, 0.2], [2.0, -1.0]] {
            let x = steps[0].apply(p, 1.0);
            let y = steps[0].apply_conjugated(p);
            let z = m.apply_lift(p);
            for i in 0..2 {
                assert!((x[i] - y[i]).abs() < 1e-12 && (x[i] - z[i]).abs() < 1e-12);
            }
        }
    }
}
