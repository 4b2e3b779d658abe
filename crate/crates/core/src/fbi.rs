//! FBI transforms on a flat circle and exponentially weighted phase-space
//! norms.
//!
//! Traces live on a circle of length `P` (2π for the model problem, the
//! boundary length for computed modes). Frequencies are `ω_k = 2πk/P` and the
//! phase-space fibre variable `α_ξ` is scaled so the characteristic set of
//! `hD − 1` is `|α_ξ| = 1`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtn::SteklovMode;
use crate::error::{Error, Result};
use crate::fourier;

/// Gaussian factors below this are dropped from sums.
const GAUSS_CUTOFF: f64 = 1e-16;
/// Largest tolerated overlap of neighbouring periodized Gaussians.
const OVERLAP_TOL: f64 = 1e-3;
/// Default `|p|` band for the Thm 3 style weights.
pub const DEFAULT_BAND: f64 = 0.5;

/// Uniform phase-space grid: `n_x` points on `[0, P)` and `n_xi` points on
/// `[xi_min, xi_max]` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    pub n_x: usize,
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_xi: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        PhaseGrid { n_x: 256, xi_min: -3.0, xi_max: 3.0, n_xi: 601 }
    }
}

impl PhaseGrid {
    fn validate(&self) -> Result<()> {
        if self.n_x == 0
            || self.n_xi < 2
            || !(self.xi_max > self.xi_min)
            || !self.xi_min.is_finite()
            || !self.xi_max.is_finite()
        {
            return Err(Error::InvalidParameter(format!("bad phase-space grid {self:?}")));
        }
        Ok(())
    }

    fn xi_step(&self) -> f64 {
        (self.xi_max - self.xi_min) / (self.n_xi - 1) as f64
    }

    fn xis(&self) -> Vec<f64> {
        (0..self.n_xi).map(|l| self.xi_min + l as f64 * self.xi_step()).collect()
    }

    fn xs(&self, period: f64) -> Vec<f64> {
        (0..self.n_x).map(|i| period * i as f64 / self.n_x as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// Periodized Gaussian wave-packet transform.
    Geo,
    /// Holomorphically continued heat kernel at time `h/2`.
    Hol,
}

/// Samples of a transform on a [`PhaseGrid`]; `values[i * n_xi + l]` is the
/// value at `(alpha_x[i], alpha_xi[l])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceTable {
    pub alpha_x: Vec<f64>,
    pub alpha_xi: Vec<f64>,
    pub values: Vec<Complex64>,
    pub h: f64,
    pub period: f64,
    pub kind: TransformKind,
}

impl PhaseSpaceTable {
    pub fn value(&self, i: usize, l: usize) -> Complex64 {
        self.values[i * self.alpha_xi.len() + l]
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, Complex64)> + '_ {
        let nxi = self.alpha_xi.len();
        self.values.iter().enumerate().map(move |(j, v)| (self.alpha_x[j / nxi], self.alpha_xi[j % nxi], *v))
    }

    /// Trapezoid weights in `α_ξ` counting only grid segments whose both
    /// endpoints satisfy `keep`.
    fn xi_weights(&self, keep: impl Fn(f64) -> bool) -> Vec<f64> {
        let xi = &self.alpha_xi;
        let mut w = vec![0.0; xi.len()];
        for l in 0..xi.len() - 1 {
            if keep(xi[l]) && keep(xi[l + 1]) {
                let half = 0.5 * (xi[l + 1] - xi[l]);
                w[l] += half;
                w[l + 1] += half;
            }
        }
        w
    }

    fn x_step(&self) -> f64 {
        self.period / self.alpha_x.len() as f64
    }

    /// Plain discrete `L²` norm over the whole table.
    pub fn l2_norm(&self) -> f64 {
        let w = self.xi_weights(|_| true);
        let dx = self.x_step();
        let nxi = self.alpha_xi.len();
        self.values.iter().enumerate().map(|(j, v)| v.norm_sqr() * w[j % nxi] * dx).sum::<f64>().sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `L²` mass restricted to `lo <= |α_ξ| <= hi`.
    pub fn band_norm(&self, lo: f64, hi: f64) -> f64 {
        let w = self.xi_weights(|xi| xi.abs() >= lo && xi.abs() <= hi);
        let dx = self.x_step();
        let nxi = self.alpha_xi.len();
        self.values.iter().enumerate().map(|(j, v)| v.norm_sqr() * w[j % nxi] * dx).sum::<f64>().sqrt()
    }
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidParameter(format!("h must lie in (0, 1], got {h}")));
    }
    Ok(())
}

fn check_samples(samples: &[Complex64]) -> Result<()> {
    if samples.len() < 2 || samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("need at least two finite samples".into()));
    }
    Ok(())
}

/// Gaussian transform on the circle `ℝ/2πℤ`.
pub fn fbi_geo_circle(samples: &[Complex64], h: f64, grid: &PhaseGrid) -> Result<PhaseSpaceTable> {
    fbi_geo(samples, TAU, h, grid)
}

/// `T u(α) = 2^{-1/2}(πh)^{-3/4} Σ_m ∫ e^{i s α_ξ/h − s²/2h} u(y) dy` with
/// `s = α_x − y − mP`, by the trapezoid rule on the samples.
pub fn fbi_geo(samples: &[Complex64], period: f64, h: f64, grid: &PhaseGrid) -> Result<PhaseSpaceTable> {
    check_h(h)?;
    check_samples(samples)?;
    grid.validate()?;
    let overlap = (-(0.5 * period).powi(2) / (2.0 * h)).exp();
    if overlap > OVERLAP_TOL {
        return Err(Error::PeriodizationOverlap { h, overlap });
    }
    let n = samples.len();
    let dy = period / n as f64;
    let reach = (2.0 * h * -GAUSS_CUTOFF.ln()).sqrt();
    let images = (reach / period).ceil() as i64 + 1;
    let prefactor = 2f64.sqrt().recip() * (PI * h).powf(-0.75) * dy;
    let xis = grid.xis();
    let dxi = grid.xi_step();
    let xs = grid.xs(period);

    let rows: Vec<Vec<Complex64>> = xs
        .par_iter()
        .map(|&ax| {
            let mut acc = vec![Complex64::new(0.0, 0.0); xis.len()];
            for (j, u) in samples.iter().enumerate() {
                let y = period * j as f64 / n as f64;
                for m in -images..=images {
                    let s = ax - y - m as f64 * period;
                    if s.abs() > reach {
                        continue;
                    }
                    let g = (-s * s / (2.0 * h)).exp();
                    let mut z = u * g * Complex64::from_polar(1.0, s * xis[0] / h);
                    let step = Complex64::from_polar(1.0, s * dxi / h);
                    for a in acc.iter_mut() {
                        *a += z;
                        z *= step;
                    }
                }
            }
            acc.iter_mut().for_each(|a| *a *= prefactor);
            acc
        })
        .collect();
    Ok(PhaseSpaceTable { alpha_x: xs, alpha_xi: xis, values: rows.concat(), h, period, kind: TransformKind::Geo })
}

/// Heat-kernel transform on the circle `ℝ/2πℤ`.
pub fn fbi_hol_circle(samples: &[Complex64], h: f64, grid: &PhaseGrid) -> Result<PhaseSpaceTable> {
    fbi_hol(samples, TAU, h, grid)
}

/// `T u(α) = h^{-1/4} Σ_k c_k e^{iω_k α_x} e^{-(α_ξ − hω_k)²/2h}`, the heat
/// kernel continued to `α_x − iα_ξ` and multiplied by `e^{-α_ξ²/2h}`, applied
/// to the Fourier coefficients `c_k` of the samples.
pub fn fbi_hol(samples: &[Complex64], period: f64, h: f64, grid: &PhaseGrid) -> Result<PhaseSpaceTable> {
    check_h(h)?;
    check_samples(samples)?;
    grid.validate()?;
    let n = samples.len();
    let needed = ((2.0 * -GAUSS_CUTOFF.ln() / h).sqrt() * period / TAU).ceil() as usize;
    let available = n / 2;
    if needed > available {
        return Err(Error::TruncationUnmet { needed, available });
    }
    let coefs = fourier::coefficients(samples);
    let terms: Vec<(f64, Complex64)> = coefs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .flat_map(|(j, c)| {
            let k = fourier::wavenumber(j, n);
            let w = TAU * k as f64 / period;
            // the unpaired Nyquist coefficient is split over ±n/2
            if n.is_multiple_of(2) && k == (n / 2) as i64 {
                vec![(w, c * 0.5), (-w, c * 0.5)]
            } else {
                vec![(w, *c)]
            }
        })
        .collect();
    let scale = h.powf(-0.25);
    let xis = grid.xis();
    let xs = grid.xs(period);
    let rows: Vec<Vec<Complex64>> = xs
        .par_iter()
        .map(|&ax| {
            let phases: Vec<Complex64> = terms.iter().map(|(w, c)| c * Complex64::from_polar(scale, w * ax)).collect();
            xis.iter()
                .map(|&xi| {
                    terms
                        .iter()
                        .zip(&phases)
                        .map(|((w, _), p)| {
                            let d = xi - h * w;
                            let e = d * d / (2.0 * h);
                            if e > 40.0 {
                                Complex64::new(0.0, 0.0)
                            } else {
                                p * (-e).exp()
                            }
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(PhaseSpaceTable { alpha_x: xs, alpha_xi: xis, values: rows.concat(), h, period, kind: TransformKind::Hol })
}

/// Weight families on the fibre variable with `p = |α_ξ| − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightFamily {
    /// `δ p² / ⟨ξ⟩^{2k}`, vanishing exactly on the characteristic set.
    Thm2 { delta: f64, k_order: u32 },
    /// `γ p²/2` with `0 < γ < ½`.
    Thm3Gamma { gamma: f64 },
    /// `p²/2`.
    Thm3Sharp,
}

/// A weight family plus an optional restriction `|p| <= band`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub family: WeightFamily,
    #[serde(default)]
    pub band: Option<f64>,
}

impl WeightSpec {
    pub fn thm2(delta: f64, k_order: u32) -> Self {
        WeightSpec { family: WeightFamily::Thm2 { delta, k_order }, band: None }
    }

    pub fn thm3_gamma(gamma: f64) -> Self {
        WeightSpec { family: WeightFamily::Thm3Gamma { gamma }, band: Some(DEFAULT_BAND) }
    }

    pub fn thm3_sharp() -> Self {
        WeightSpec { family: WeightFamily::Thm3Sharp, band: Some(DEFAULT_BAND) }
    }

    pub fn with_band(mut self, band: Option<f64>) -> Self {
        self.band = band;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            WeightFamily::Thm2 { delta, .. } if !(delta > 0.0 && delta.is_finite()) => {
                return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")))
            }
            WeightFamily::Thm3Gamma { gamma } if !(gamma > 0.0 && gamma < 0.5) => {
                return Err(Error::GammaOutOfRange(gamma))
            }
            _ => {}
        }
        if let Some(b) = self.band {
            if !(b > 0.0) {
                return Err(Error::InvalidParameter(format!("band must be positive, got {b}")));
            }
        }
        Ok(())
    }

    fn in_band(&self, xi: f64) -> bool {
        self.band.is_none_or(|b| (xi.abs() - 1.0).abs() <= b)
    }
}

/// The weight `ψ(α_ξ)`.
pub fn weight_eval(spec: &WeightSpec, xi: f64) -> Result<f64> {
    spec.validate()?;
    let p = xi.abs() - 1.0;
    Ok(match spec.family {
        WeightFamily::Thm2 { delta, k_order } => delta * p * p / (1.0 + xi * xi).powi(k_order as i32),
        WeightFamily::Thm3Gamma { gamma } => gamma * p * p / 2.0,
        WeightFamily::Thm3Sharp => p * p / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L2,
    Linf,
}

/// `‖e^{ψ/h} T u‖` over the table (restricted to the weight's band),
/// accumulated in log space.
pub fn weighted_norm(table: &PhaseSpaceTable, spec: &WeightSpec, norm: NormKind) -> Result<f64> {
    spec.validate()?;
    let nxi = table.alpha_xi.len();
    let psi =
        table.alpha_xi.iter().map(|&xi| weight_eval(spec, xi).map(|w| w / table.h)).collect::<Result<Vec<_>>>()?;
    let log_abs = |j: usize| {
        let a = table.values[j].norm();
        if a > 0.0 {
            psi[j % nxi] + a.ln()
        } else {
            f64::NEG_INFINITY
        }
    };
    let log_norm = match norm {
        NormKind::Linf => (0..table.values.len())
            .filter(|j| spec.in_band(table.alpha_xi[j % nxi]))
            .map(log_abs)
            .fold(f64::NEG_INFINITY, f64::max),
        NormKind::L2 => {
            let w = table.xi_weights(|xi| spec.in_band(xi));
            let dx = table.x_step();
            let terms: Vec<f64> = (0..table.values.len())
                .filter(|j| w[j % nxi] > 0.0)
                .map(|j| 2.0 * log_abs(j) + (w[j % nxi] * dx).ln())
                .filter(|t| t.is_finite())
                .collect();
            let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                0.5 * (top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln())
            }
        }
    };
    if log_norm > f64::MAX.ln() {
        return Err(Error::WeightOverflow(log_norm));
    }
    Ok(log_norm.exp())
}

/// `L²` norm of the table restricted to `|α_ξ| <= eps`.
pub fn zero_section_mass(table: &PhaseSpaceTable, eps: f64) -> f64 {
    table.band_norm(0.0, eps)
}

/// Resamples a computed trace at equal arclength on one boundary component
/// and transforms it with `h = 1/σ` on the circle of the component's length.
pub fn fbi_of_computed_mode(
    mode: &SteklovMode,
    component: usize,
    kind: TransformKind,
    grid: &PhaseGrid,
) -> Result<PhaseSpaceTable> {
    let limit = mode.grid().per_component() / 4;
    let wavenumber = mode.wavenumber();
    if !mode.resolved || wavenumber > limit {
        return Err(Error::UnresolvedMode { sigma: mode.sigma, wavenumber, limit });
    }
    let h =
        mode.h().ok_or_else(|| Error::InvalidParameter("the constant mode has no semiclassical parameter".into()))?;
    let (samples, length) = arclength_trace(mode, component)?;
    match kind {
        TransformKind::Geo => fbi_geo(&samples, length, h, grid),
        TransformKind::Hol => fbi_hol(&samples, length, h, grid),
    }
}

/// Trace of `mode` on `component` at `2N` equal-arclength points, and the
/// component length.
pub fn arclength_trace(mode: &SteklovMode, component: usize) -> Result<(Vec<Complex64>, f64)> {
    let grid = mode.grid();
    let domain = grid.domain();
    if component >= domain.components().len() {
        return Err(Error::InvalidParameter(format!("no boundary component {component}")));
    }
    let curve = domain.component(component);
    let n = grid.per_component();
    let trace = &mode.trace[grid.component_range(component)];

    // s(t) = a₀ t + Σ_{k≠0} a_k (e^{ikt} − 1)/(ik) from the speed's Fourier series
    let m_speed = 4 * n;
    let speed: Vec<Complex64> = fourier::grid(m_speed).map(|t| Complex64::new(curve.speed(t), 0.0)).collect();
    let a = fourier::coefficients(&speed);
    let length = a[0].re * TAU;
    let arc = |t: f64| -> f64 {
        let mut s = a[0].re * t;
        for (j, c) in a.iter().enumerate().skip(1) {
            let k = fourier::wavenumber(j, m_speed);
            if k.unsigned_abs() as usize == m_speed / 2 {
                continue;
            }
            let kf = k as f64;
            s += (c * (Complex64::from_polar(1.0, kf * t) - 1.0) / Complex64::new(0.0, kf)).re;
        }
        s
    };

    let m = 2 * n;
    let mut ts = Vec::with_capacity(m);
    for j in 0..m {
        let target = length * j as f64 / m as f64;
        let mut t = TAU * j as f64 / m as f64;
        for _ in 0..50 {
            let step = (arc(t) - target) / curve.speed(t);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        ts.push(t);
    }
    Ok((fourier::interpolate(trace, &ts), length))
}
