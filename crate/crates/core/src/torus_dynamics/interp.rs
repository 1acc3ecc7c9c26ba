use std::f64::consts::TAU;

/// Periodic cubic-convolution (Catmull–Rom) interpolant on the uniform n×n
/// grid of the torus. Exact at grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

impl PeriodicGrid {
    pub fn new(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "grid data must be n*n");
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn locate(&self, a: f64) -> (i64, f64) {
        let u = a.rem_euclid(TAU) * self.n as f64 / TAU;
        let i = u.floor();
        let t = u - i;
        (i as i64, t)
    }

    #[inline]
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let n = self.n as i64;
        let (i, tx) = self.locate(p[0]);
        let (j, ty) = self.locate(p[1]);
        let wx = weights(tx);
        let wy = weights(ty);
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            if *wa == 0.0 {
                continue;
            }
            let row = ((i + a as i64 - 1).rem_euclid(n) * n) as usize;
            let mut s = 0.0;
            for (b, wb) in wy.iter().enumerate() {
                if *wb == 0.0 {
                    continue;
                }
                s += wb * self.data[row + (j + b as i64 - 1).rem_euclid(n) as usize];
            }
            acc += wa * s;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_smooth_data() {
        let n = 64;
        let h = TAU / n as f64;
        let f = |x: f64, y: f64| x.sin() * (2.0 * y).cos();
        let mut d = Vec::new();
        for i in 0..n {
            for j in 0..n {
                d.push(f(i as f64 * h, j as f64 * h));
            }
        }
        let g = PeriodicGrid::new(n, d);
        assert_eq!(g.eval([3.0 * h, 5.0 * h]), f(3.0 * h, 5.0 * h));
        for p in [[0.1234, 4.321], [6.2, 0.05], [-1.0, 7.0]] {
            assert!((g.eval(p) - f(p[0], p[1])).abs() < 1e-4);
        }
    }
}
