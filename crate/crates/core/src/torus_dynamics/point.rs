use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A point of the torus R²/2πZ².
///
/// Coordinates are stored as given; [`TorusPoint::canonical`] reduces them to
/// `[0, 2π)`. Most maps in this crate act on lifts in R², which keeps
/// compositions continuous and makes comparisons with reference flows simple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

impl TorusPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_array(p: [f64; 2]) -> Self {
        Self { x: p[0], y: p[1] }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn canonical(self) -> Self {
        Self {
            x: wrap_angle(self.x),
            y: wrap_angle(self.y),
        }
    }

    /// The hyperelliptic involution (x, y) ↦ (−x, −y).
    pub fn tau(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
        }
    }

    pub fn distance(self, other: Self) -> f64 {
        torus_distance(self.to_array(), other.to_array())
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference a − b reduced to `(−π, π]`.
pub fn wrap_signed(d: f64) -> f64 {
    let r = wrap_angle(d);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// Quotient Euclidean distance on R²/2πZ².
pub fn torus_distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    let dx = wrap_signed(p[0] - q[0]);
    let dy = wrap_signed(p[1] - q[1]);
    dx.hypot(dy)
}

/// Uniform periodic grid point `(2πi/n, 2πj/n)`.
pub fn grid_point(i: usize, j: usize, n: usize) -> [f64; 2] {
    let h = TAU / n as f64;
    [i as f64 * h, j as f64 * h]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn canonical_range() {
        for a in [-7.0, -TAU, -1e-300, 0.0, 3.0, TAU, 13.0] {
            let w = wrap_angle(a);
            assert!((0.0..TAU).contains(&w), "{a} -> {w}");
        }
    }

    #[test]
    fn distance_uses_shortest_lift() {
        let p = [0.1, 0.1];
        let q = [TAU - 0.1, 0.1];
        assert!((torus_distance(p, q) - 0.2).abs() < 1e-12);
        assert!((torus_distance([0.0, 0.0], [PI, PI]) - PI * 2f64.sqrt()).abs() < 1e-12);
    }
}
