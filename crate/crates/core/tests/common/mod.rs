#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;
use steklov::dtn::{assemble_layers, steklov_solve, SteklovMode};
use steklov::geometry::Domain;
use steklov::reference::{annulus_mode, annulus_spectrum, disk_mode};

pub fn solve(domain: &Domain, n: usize, count: usize) -> Vec<SteklovMode> {
    steklov_solve(&assemble_layers(domain, n).unwrap(), count).unwrap()
}

/// Modes whose eigenvalue lies within `tol` of `sigma`.
pub fn near(modes: &[SteklovMode], sigma: f64, tol: f64) -> Vec<&SteklovMode> {
    modes.iter().filter(|m| (m.sigma - sigma).abs() < tol).collect()
}

/// Mode whose eigenvalue is closest to `sigma`.
pub fn closest(modes: &[SteklovMode], sigma: f64) -> &SteklovMode {
    modes.iter().min_by(|a, b| (a.sigma - sigma).abs().total_cmp(&(b.sigma - sigma).abs())).unwrap()
}

/// The computed disk mode `e^{ikθ}/√(2πR)`, obtained by projecting onto the
/// closed form inside its degenerate pair.
pub fn disk_travelling(modes: &[SteklovMode], radius: f64, k: usize) -> SteklovMode {
    let pair = near(modes, k as f64 / radius, 1e-6);
    assert_eq!(pair.len(), 2, "disk eigenvalue {k} should be double");
    let target: Vec<Complex64> = pair[0].grid().nodes().iter().map(|n| disk_mode(radius, k, radius, n.t)).collect();
    SteklovMode::project(&pair, &target).unwrap()
}

/// Low-discrepancy points in the unit square (Halton bases 2 and 3).
pub fn halton(n: usize) -> Vec<[f64; 2]> {
    fn radical(mut i: usize, base: usize) -> f64 {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    (1..=n).map(|i| [radical(i, 2), radical(i, 3)]).collect()
}

/// Area-uniform points in the disk of radius `r`.
pub fn disk_points(n: usize, r: f64) -> Vec<[f64; 2]> {
    halton(n)
        .into_iter()
        .map(|[u, v]| {
            let rho = r * u.sqrt();
            [rho * (TAU * v).cos(), rho * (TAU * v).sin()]
        })
        .collect()
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn plane_wave(n: usize, k: f64) -> Vec<Complex64> {
    steklov::fourier::grid(n).map(|y| Complex64::from_polar(1.0, k * y)).collect()
}

pub fn ratio(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// The computed annulus mode `k` on `branch`, projected onto its closed form
/// within the cluster of eigenvalues near the root. With `r₀ = ½` the
/// larger root for `k` nearly coincides with the smaller root for `2k`.
pub fn annulus_travelling(modes: &[SteklovMode], r0: f64, k: usize, branch: usize) -> SteklovMode {
    let sigma = annulus_spectrum(r0, k).unwrap().sigma[branch];
    let cluster = near(modes, sigma, 1e-6 * sigma.max(1.0));
    assert!(cluster.len() >= 2, "annulus root {sigma} not found");
    let target: Vec<Complex64> = cluster[0]
        .grid()
        .nodes()
        .iter()
        .map(|n| annulus_mode(r0, k, sigma, n.point[0].hypot(n.point[1]), n.point[1].atan2(n.point[0])).unwrap())
        .collect();
    SteklovMode::project(&cluster, &target).unwrap()
}
