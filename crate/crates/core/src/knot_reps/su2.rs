use serde::{Deserialize, Serialize};
use std::ops::Mul;

/// Unit quaternion `w + x i + y j + z k`, identified with SU(2) via
/// `i ↦ diag(i, −i)`. The maximal torus of diagonal matrices is the
/// `i`-axis, so `diag(e^{iα}, e^{−iα})` is `cos α + i sin α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Su2 {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Su2 {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Su2> for [f64; 4] {
    fn from(q: Su2) -> Self {
        q.to_array()
    }
}

impl Su2 {
    pub const IDENTITY: Self = Self { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: Self = Self { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const J: Self = Self { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const K: Self = Self { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    /// Normalized quaternion; the zero quaternion maps to the identity.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }.normalized()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Self::IDENTITY;
        }
        Self {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    /// `cos α + i sin α`, the diagonal element with eigenvalue `e^{iα}`.
    pub fn diag(alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        Self { w: c, x: s, y: 0.0, z: 0.0 }
    }

    /// Exponential of the pure quaternion `v = (v₁, v₂, v₃)`.
    pub fn exp(v: [f64; 3]) -> Self {
        let t = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if t < 1e-300 {
            return Self::IDENTITY;
        }
        let s = t.sin() / t;
        Self::new(t.cos(), s * v[0], s * v[1], s * v[2])
    }

    pub fn inverse(self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn vector(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Angle θ ∈ [0, π] with `w = cos θ`.
    pub fn angle(self) -> f64 {
        self.w.clamp(-1.0, 1.0).acos()
    }

    /// Operator-norm distance of the corresponding SU(2) matrices.
    pub fn distance(self, other: Self) -> f64 {
        let d = [self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3]).sqrt()
    }

    /// `c · self · c⁻¹`.
    pub fn conjugate_by(self, c: Self) -> Self {
        c * self * c.inverse()
    }

    /// Group commutator `a b a⁻¹ b⁻¹`.
    pub fn commutator(a: Self, b: Self) -> Self {
        a * b * a.inverse() * b.inverse()
    }

    pub fn pow(self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self };
        let mut out = Self::IDENTITY;
        for _ in 0..n.unsigned_abs() {
            out = out * base;
        }
        out
    }
}

impl Mul for Su2 {
    type Output = Su2;

    fn mul(self, o: Su2) -> Su2 {
        Su2 {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
        .normalized()
    }
}
