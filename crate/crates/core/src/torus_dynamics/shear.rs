use super::point::TorusPoint;
use super::profile::ShearingProfile;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShearError {
    #[error("direction {0:?} is not a primitive integer vector")]
    NonPrimitiveDirection([i64; 2]),
    #[error("normal {0:?} must be primitive")]
    NonPrimitiveNormal([i64; 2]),
    #[error("direction {v:?} and normal {w:?} are not orthogonal")]
    NotOrthogonal { v: [i64; 2], w: [i64; 2] },
    #[error("equivariant shears need odd profiles")]
    NotOdd,
}

/// The exact area-preserving map p ↦ p + f(⟨p, w⟩)·v.
///
/// Viewed as a vector field W(p) = f(⟨p, w⟩)·v it is divergence free and its
/// flow for time s is p ↦ p + s·W(p), because ⟨v, w⟩ = 0 keeps the linear
/// form constant along trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearingMap {
    pub v: [i64; 2],
    pub w: [i64; 2],
    pub profile: ShearingProfile,
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl ShearingMap {
    pub fn new(v: [i64; 2], w: [i64; 2], profile: ShearingProfile) -> Result<Self, ShearError> {
        let map = Self { v, w, profile };
        map.validate()?;
        Ok(map)
    }

    /// The shear along v = (−w₂, w₁) for a primitive normal w.
    pub fn along_normal(w: [i64; 2], profile: ShearingProfile) -> Result<Self, ShearError> {
        Self::new([-w[1], w[0]], w, profile)
    }

    pub fn validate(&self) -> Result<(), ShearError> {
        if gcd(self.v[0], self.v[1]) != 1 {
            return Err(ShearError::NonPrimitiveDirection(self.v));
        }
        if gcd(self.w[0], self.w[1]) != 1 {
            return Err(ShearError::NonPrimitiveNormal(self.w));
        }
        if self.v[0] * self.w[0] + self.v[1] * self.w[1] != 0 {
            return Err(ShearError::NotOrthogonal {
                v: self.v,
                w: self.w,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn linear_form(&self, p: [f64; 2]) -> f64 {
        self.w[0] as f64 * p[0] + self.w[1] as f64 * p[1]
    }

    /// The vector field W(p) = f(l(p))·v.
    #[inline]
    pub fn field(&self, p: [f64; 2]) -> [f64; 2] {
        let f = self.profile.eval(self.linear_form(p));
        [f * self.v[0] as f64, f * self.v[1] as f64]
    }

    /// Jacobian DW(p) = f′(l(p))·v wᵀ, row-major.
    #[inline]
    pub fn jacobian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let d = self.profile.derivative(self.linear_form(p));
        let (v, w) = (self.v.map(|a| a as f64), self.w.map(|a| a as f64));
        [
            [d * v[0] * w[0], d * v[0] * w[1]],
            [d * v[1] * w[0], d * v[1] * w[1]],
        ]
    }

    /// Applies the flow of W for time s to a lifted point.
    #[inline]
    pub fn flow_lift(&self, p: [f64; 2], s: f64) -> [f64; 2] {
        let f = s * self.profile.eval(self.linear_form(p));
        [p[0] + f * self.v[0] as f64, p[1] + f * self.v[1] as f64]
    }

    /// Applies the map to a lifted point without reducing mod 2π.
    #[inline]
    pub fn apply_lift(&self, p: [f64; 2]) -> [f64; 2] {
        self.flow_lift(p, 1.0)
    }

    pub fn inverse(&self) -> Self {
        Self {
            v: self.v,
            w: self.w,
            profile: self.profile.scaled(-1.0),
        }
    }

    pub fn is_equivariant(&self) -> bool {
        self.profile.is_odd()
    }

    /// sup |W| (analytic bound).
    pub fn sup_bound(&self) -> f64 {
        self.profile.sup_bound() * norm_i(self.v)
    }

    /// Lipschitz bound sup ‖DW‖.
    pub fn lipschitz_bound(&self) -> f64 {
        self.profile.derivative_bound() * norm_i(self.v) * norm_i(self.w)
    }

    /// Bound on the second derivative sup ‖D²W‖.
    pub fn second_derivative_bound(&self) -> f64 {
        self.profile.second_derivative_bound() * norm_i(self.v) * norm_i(self.w).powi(2)
    }
}

fn norm_i(a: [i64; 2]) -> f64 {
    (a[0] as f64).hypot(a[1] as f64)
}

/// Applies a shearing map to a torus point and returns the canonical image.
pub fn apply_shearing(map: &ShearingMap, p: TorusPoint) -> TorusPoint {
    TorusPoint::from_array(map.apply_lift(p.to_array())).canonical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn prototype_shear() {
        let m = ShearingMap::new([1, 0], [0, 1], ShearingProfile::sine(1, 1.0)).unwrap();
        let q = apply_shearing(&m, TorusPoint::new(0.0, FRAC_PI_2));
        assert!((q.x - 1.0).abs() < 1e-15);
        assert!((q.y - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn zero_profile_is_identity() {
        let m = ShearingMap::new([2, 3], [3, -2], ShearingProfile::zero()).unwrap();
        let p = TorusPoint::new(1.25, 4.5);
        assert_eq!(apply_shearing(&m, p), p);
    }

    #[test]
    fn validation_rejects_bad_data() {
        assert!(matches!(
            ShearingMap::new([2, 4], [2, -1], ShearingProfile::zero()),
            Err(ShearError::NonPrimitiveDirection(_))
        ));
        assert!(matches!(
            ShearingMap::new([1, 1], [1, 0], ShearingProfile::zero()),
            Err(ShearError::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn jacobian_is_nilpotent() {
        let m = ShearingMap::along_normal([2, 1], ShearingProfile::sine(1, 0.4)).unwrap();
        let j = m.jacobian([0.3, 1.1]);
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        assert!(tr.abs() < 1e-15 && det.abs() < 1e-15);
    }
}
