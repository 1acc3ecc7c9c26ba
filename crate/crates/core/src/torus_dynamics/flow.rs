//! Reference flows and the a-priori flow comparison bounds.

use super::field::SAFETY_FACTOR;
use super::point::grid_point;
use super::shear::ShearingMap;
use serde::{Deserialize, Serialize};

#[inline]
pub fn rk4_step(f: &dyn Fn(f64, [f64; 2]) -> [f64; 2], t: f64, p: [f64; 2], dt: f64) -> [f64; 2] {
    let k1 = f(t, p);
    let k2 = f(t + 0.5 * dt, [p[0] + 0.5 * dt * k1[0], p[1] + 0.5 * dt * k1[1]]);
    let k3 = f(t + 0.5 * dt, [p[0] + 0.5 * dt * k2[0], p[1] + 0.5 * dt * k2[1]]);
    let k4 = f(t + dt, [p[0] + dt * k3[0], p[1] + dt * k3[1]]);
    [
        p[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrates dp/dt = f(t, p) from t0 to t1 with `steps` RK4 steps.
pub fn rk4_flow(
    f: &dyn Fn(f64, [f64; 2]) -> [f64; 2],
    p: [f64; 2],
    t0: f64,
    t1: f64,
    steps: usize,
) -> [f64; 2] {
    let steps = steps.max(1);
    let dt = (t1 - t0) / steps as f64;
    let mut q = p;
    for s in 0..steps {
        q = rk4_step(f, t0 + s as f64 * dt, q, dt);
    }
    q
}

/// Flow from time 0 sampled at the nondecreasing `times`, with steps no
/// longer than `max_dt`.
pub fn rk4_trajectory(
    f: &dyn Fn(f64, [f64; 2]) -> [f64; 2],
    p: [f64; 2],
    times: &[f64],
    max_dt: f64,
) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(times.len());
    let mut q = p;
    let mut t = 0.0;
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / max_dt).ceil() as usize;
            q = rk4_flow(f, q, t, target, steps);
            t = target;
        }
        out.push(q);
    }
    out
}

/// Gronwall comparison ‖φ_X^t − φ_Y^t‖ ≤ t·‖X − Y‖·e^{Lt}.
pub fn gronwall_bound(t: f64, sup_diff: f64, lipschitz: f64) -> f64 {
    t * sup_diff * (lipschitz * t).exp()
}

/// Constant C in ‖φ_Z^t − φ_{W_m}^t∘…∘φ_{W_1}^t‖ ≤ (t²/2)·C·e^{Lt}, t ≤ 1,
/// for Z = ΣW_i a sum of shearing fields. C = B + (2/3)·R where
/// B = Σ_i ‖Σ_{j>i}[W_i, W_j]‖ and R bounds the third-order remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingConstant {
    pub commutator: f64,
    pub remainder: f64,
}

impl SplittingConstant {
    pub fn total(&self) -> f64 {
        self.commutator + 2.0 / 3.0 * self.remainder
    }
}

pub fn splitting_bound(t: f64, c: f64, lipschitz: f64) -> f64 {
    0.5 * t * t * c * (lipschitz * t).exp()
}

/// Computes the splitting constant for shearing fields applied in order
/// `maps[0]` first. The commutator sups are grid estimates (×1.1) capped by
/// their analytic bounds.
pub fn splitting_constant(maps: &[ShearingMap], grid: usize) -> SplittingConstant {
    let m = maps.len();
    if m < 2 {
        return SplittingConstant {
            commutator: 0.0,
            remainder: 0.0,
        };
    }
    let a: Vec<f64> = maps.iter().map(ShearingMap::sup_bound).collect();
    let b: Vec<f64> = maps.iter().map(ShearingMap::lipschitz_bound).collect();
    let c: Vec<f64> = maps.iter().map(ShearingMap::second_derivative_bound).collect();

    // grid sup of Σ_{j>i}[W_i, W_j] = (Σ_{j>i} DW_j)·W_i − DW_i·(Σ_{j>i} W_j)
    let mut sup = vec![0.0f64; m];
    let n = grid;
    let mut w = vec![[0.0; 2]; m];
    let mut dw = vec![[[0.0; 2]; 2]; m];
    for gi in 0..n {
        for gj in 0..n {
            let p = grid_point(gi, gj, n);
            for (r, map) in maps.iter().enumerate() {
                w[r] = map.field(p);
                dw[r] = map.jacobian(p);
            }
            let mut sw = [0.0; 2];
            let mut sd = [[0.0; 2]; 2];
            for i in (0..m).rev() {
                let x = [
                    sd[0][0] * w[i][0] + sd[0][1] * w[i][1] - (dw[i][0][0] * sw[0] + dw[i][0][1] * sw[1]),
                    sd[1][0] * w[i][0] + sd[1][1] * w[i][1] - (dw[i][1][0] * sw[0] + dw[i][1][1] * sw[1]),
                ];
                sup[i] = sup[i].max(x[0].hypot(x[1]));
                sw[0] += w[i][0];
                sw[1] += w[i][1];
                for r in 0..2 {
                    for s in 0..2 {
                        sd[r][s] += dw[i][r][s];
                    }
                }
            }
        }
    }
    let mut commutator = 0.0;
    for i in 0..m {
        let analytic: f64 = ((i + 1)..m).map(|j| b[j] * a[i] + b[i] * a[j]).sum();
        commutator += (sup[i] * SAFETY_FACTOR).min(analytic);
    }

    let mut remainder = 0.0;
    for i in 0..m {
        let mut prod = 1.0;
        let mut sum_b = 0.0;
        let mut sum_a = 0.0;
        for j in (i + 1)..m {
            prod *= 1.0 + b[j];
            sum_b += b[j];
            sum_a += a[j];
        }
        let mut r = a[i] * (prod - 1.0 - sum_b).max(0.0) + 0.5 * c[i] * sum_a * sum_a;
        let mut between = 0.0;
        for j in (i + 1)..m {
            r += (c[j] * a[i] + b[i] * b[j]) * between;
            between += a[j];
        }
        remainder += r;
    }
    SplittingConstant {
        commutator,
        remainder,
    }
}
