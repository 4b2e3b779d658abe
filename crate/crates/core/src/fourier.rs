//! Periodic trigonometric helpers on uniform grids.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Fourier coefficients `c_k` with `u(t_j) = Σ_k c_k e^{i k t_j}`, stored in
/// FFT order (`k = 0, 1, …, n/2, -(n/2-1), …, -1`).
pub fn coefficients(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Signed wavenumber of FFT slot `j` for length `n`.
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Band-limited interpolation of `samples` onto `factor·n` uniform points
/// by zero padding. The Nyquist coefficient of an even-length input is split
/// evenly between `±n/2`, so real input stays real.
pub fn upsample(samples: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = samples.len();
    let m = n * factor;
    if factor == 1 {
        return samples.to_vec();
    }
    let c = coefficients(samples);
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    for (j, cj) in c.iter().enumerate() {
        let k = wavenumber(j, n);
        if n.is_multiple_of(2) && k == (n / 2) as i64 {
            padded[n / 2] += cj * 0.5;
            padded[m - n / 2] += cj * 0.5;
        } else {
            padded[k.rem_euclid(m as i64) as usize] += cj;
        }
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut padded);
    padded
}

/// Evaluates the trigonometric interpolant of `samples` (uniform on
/// `[0, 2π)`) at arbitrary parameters.
pub fn interpolate(samples: &[Complex64], ts: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let c = coefficients(samples);
    ts.iter()
        .map(|&t| {
            c.iter()
                .enumerate()
                .map(|(j, cj)| {
                    let k = wavenumber(j, n);
                    if n.is_multiple_of(2) && k == (n / 2) as i64 {
                        cj * (k as f64 * t).cos()
                    } else {
                        cj * Complex64::from_polar(1.0, k as f64 * t)
                    }
                })
                .sum()
        })
        .collect()
}

/// Absolute wavenumber carrying the largest coefficient.
pub fn dominant_wavenumber(samples: &[Complex64]) -> usize {
    let n = samples.len();
    let c = coefficients(samples);
    let mut best = (0usize, -1.0);
    for (j, cj) in c.iter().enumerate() {
        let a = cj.norm();
        if a > best.1 {
            best = (wavenumber(j, n).unsigned_abs() as usize, a);
        }
    }
    best.0
}

/// Uniform parameter grid `2πj/n`.
pub fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| TAU * j as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(n: usize, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        grid(n).map(f).collect()
    }

    #[test]
    fn upsample_is_exact_for_trig_polynomials() {
        let f = |t: f64| Complex64::new((3.0 * t).cos() + 0.5 * (7.0 * t).sin(), t.sin());
        let coarse = sampled(32, f);
        let fine = upsample(&coarse, 8);
        for (j, t) in grid(256).enumerate() {
            assert!((fine[j] - f(t)).norm() < 1e-13);
        }
    }

    #[test]
    fn real_nyquist_stays_real() {
        let f = |t: f64| Complex64::new((16.0 * t).cos(), 0.0);
        let fine = upsample(&sampled(32, f), 4);
        assert!(fine.iter().all(|z| z.im.abs() < 1e-13));
        let vals = interpolate(&sampled(32, f), &[0.1, 0.2]);
        assert!(vals.iter().all(|z| z.im.abs() < 1e-13));
    }

    #[test]
    fn interpolation_and_dominant_mode() {
        let f = |t: f64| Complex64::from_polar(1.0, -5.0 * t) + 0.1;
        let s = sampled(64, f);
        for t in [0.01, 1.3, 5.9] {
            assert!((interpolate(&s, &[t])[0] - f(t)).norm() < 1e-13);
        }
        assert_eq!(dominant_wavenumber(&s), 5);
    }
}
