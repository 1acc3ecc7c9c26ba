//! Periodic 2D FFT helpers on an n×n grid with row-major layout
//! `data[i * n + j]` ↔ point (2πi/n, 2πj/n).

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

pub fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(data.len(), n * n);
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    // transform along j (contiguous rows)
    fft.process(data);
    // transform along i via a transposed copy
    let mut col = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            col[j * n + i] = data[i * n + j];
        }
    }
    fft.process(&mut col);
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = col[j * n + i];
        }
    }
    if inverse {
        let s = 1.0 / (n * n) as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }
}

/// Signed frequency for FFT index `i`.
pub fn freq(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Index of the signed frequency `k` on an n-point grid.
pub fn index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Real field → spectrum.
pub fn forward_real(values: &[f64], n: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut data, n, false);
    data
}

/// Spectrum → real field (imaginary parts discarded).
pub fn inverse_real(mut spec: Vec<Complex64>, n: usize) -> Vec<f64> {
    fft2(&mut spec, n, true);
    spec.into_iter().map(|z| z.re).collect()
}

/// Spectral partial derivatives (∂x, ∂y) of a real periodic field. The
/// Nyquist modes are dropped, which keeps the derivatives real.
pub fn gradient(values: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let spec = forward_real(values, n);
    let mut dx = spec.clone();
    let mut dy = spec;
    for a in 0..n {
        for b in 0..n {
            let (ka, kb) = (freq(a, n), freq(b, n));
            let nyq = n % 2 == 0 && (a == n / 2 || b == n / 2);
            let idx = a * n + b;
            if nyq {
                dx[idx] = Complex64::new(0.0, 0.0);
                dy[idx] = Complex64::new(0.0, 0.0);
            } else {
                dx[idx] *= Complex64::new(0.0, ka as f64);
                dy[idx] *= Complex64::new(0.0, kb as f64);
            }
        }
    }
    (inverse_real(dx, n), inverse_real(dy, n))
}

/// Zero-mean solution of Δg = rhs − mean(rhs). Returns (g, removed mean).
pub fn poisson(rhs: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut spec = forward_real(rhs, n);
    let mean = spec[0].re / (n * n) as f64;
    spec[0] = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            if a == 0 && b == 0 {
                continue;
            }
            let (ka, kb) = (freq(a, n) as f64, freq(b, n) as f64);
            spec[a * n + b] /= -(ka * ka + kb * kb);
        }
    }
    (inverse_real(spec, n), mean)
}

/// Spectral Laplacian (used to audit Poisson solutions).
pub fn laplacian(values: &[f64], n: usize) -> Vec<f64> {
    let mut spec = forward_real(values, n);
    for a in 0..n {
        for b in 0..n {
            let (ka, kb) = (freq(a, n) as f64, freq(b, n) as f64);
            spec[a * n + b] *= -(ka * ka + kb * kb);
        }
    }
    inverse_real(spec, n)
}

/// Trigonometric upsampling by zero padding from n to m = factor·n points.
pub fn upsample(values: &[f64], n: usize, factor: usize) -> Vec<f64> {
    let m = n * factor;
    let spec = forward_real(values, n);
    let mut big = vec![Complex64::new(0.0, 0.0); m * m];
    let half = (n / 2) as i64;
    for a in 0..n {
        for b in 0..n {
            let (ka, kb) = (freq(a, n), freq(b, n));
            let mut z = spec[a * n + b];
            // split Nyquist energy symmetrically so the result stays real
            if n % 2 == 0 && ka.abs() == half {
                z *= 0.5;
            }
            if n % 2 == 0 && kb.abs() == half {
                z *= 0.5;
            }
            let put = |big: &mut Vec<Complex64>, ka: i64, kb: i64| {
                big[index(ka, m) * m + index(kb, m)] += z;
            };
            put(&mut big, ka, kb);
            if n % 2 == 0 && ka == half {
                put(&mut big, -ka, kb);
            }
            if n % 2 == 0 && kb == half {
                put(&mut big, ka, -kb);
            }
            if n % 2 == 0 && ka == half && kb == half {
                put(&mut big, -ka, -kb);
            }
        }
    }
    let scale = (factor * factor) as f64;
    inverse_real(big, m).into_iter().map(|v| v * scale).collect()
}
