//! Interior decay of Steklov eigenfunctions along inward normal rays.
//!
//! A profile records `f(t) = −h log sup_window |u_h|` at normal distance `t`
//! from a boundary foot point. Fitting `f ≈ a₀ + a₁t + a₂t² + …` and
//! comparing `a₁` with 1 and `a₂` with `−3/2 + ½Q` checks the exponential
//! decay bound; on the closed-form examples `a₂` should be the sharp `½Q`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SteklovField;
use crate::geometry::{golden_min, Domain};

/// Samples with `|u_h|` below this are dropped.
pub const UNDERFLOW: f64 = 1e-300;
pub const MIN_FIT_SAMPLES: usize = 8;
pub const DEFAULT_FIT_RANGE: (f64, f64) = (0.02, 0.2);
pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_A1_TOL: f64 = 0.01;

/// Default half-width of the tangential sup window, in arclength units of
/// `h`: just over half a wavelength `2πh` either side of the foot.
pub const DEFAULT_WINDOW: f64 = 0.6 * std::f64::consts::PI;

const WINDOW_CELLS: usize = 16;
const EXACT_FIT_RTOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    /// Coefficients of `t³, t⁴, …` absorbed as nuisance terms.
    pub higher: Vec<f64>,
    /// Root-mean-square fit residual.
    pub residual: f64,
    pub t_range: (f64, f64),
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub component: usize,
    pub t_foot: f64,
    pub h: f64,
    /// Signed boundary curvature at the foot.
    pub foot_curvature: f64,
    pub distances: Vec<f64>,
    pub values: Vec<f64>,
    /// Distances whose samples underflowed and were dropped.
    pub dropped: Vec<f64>,
    pub fit: Option<DecayFit>,
}

impl DecayProfile {
    /// A profile built from given values, for synthetic fits and negative
    /// controls.
    pub fn synthetic(t_foot: f64, h: f64, foot_curvature: f64, distances: Vec<f64>, values: Vec<f64>) -> Self {
        DecayProfile { component: 0, t_foot, h, foot_curvature, distances, values, dropped: vec![], fit: None }
    }
}

/// Sup of `|u|` over the parameter window `[t - w, t + w]` on the parallel
/// curve at distance `s`.
fn window_sup<F: SteklovField + ?Sized>(field: &F, component: usize, t: f64, s: f64, w: f64) -> Result<f64> {
    let at = |tt: f64| -> Result<f64> { Ok(field.eval(field.fermi_point(component, tt, s)?)?.norm()) };
    if w <= 0.0 {
        return at(t);
    }
    let cell = 2.0 * w / WINDOW_CELLS as f64;
    let mut best = (t, at(t)?);
    for j in 0..=WINDOW_CELLS {
        let tt = t - w + j as f64 * cell;
        let v = at(tt)?;
        if v > best.1 {
            best = (tt, v);
        }
    }
    let lo = (best.0 - cell).max(t - w);
    let hi = (best.0 + cell).min(t + w);
    let (_, neg) = golden_min(|tt| at(tt).map(|v| -v).unwrap_or(0.0), lo, hi);
    Ok(best.1.max(-neg))
}

/// Samples `f(t) = −h log sup|u_h|` at each distance in `t_list` along the
/// inward normal from `t_foot` on `component`.
///
/// `window` is the sup half-width in arclength; `None` uses
/// [`DEFAULT_WINDOW`]`·h`, `Some(0.0)` samples the ray alone.
pub fn sample_normal_ray<F: SteklovField + ?Sized>(
    field: &F,
    component: usize,
    t_foot: f64,
    t_list: &[f64],
    window: Option<f64>,
) -> Result<DecayProfile> {
    let h = field.h();
    let half = window.unwrap_or(DEFAULT_WINDOW * h);
    if !(half >= 0.0) {
        return Err(Error::InvalidParameter(format!("window half-width must be non-negative, got {half}")));
    }
    let w = half / field.boundary_speed(component, t_foot);
    let d_min = field.min_reliable_distance();
    let mut profile = DecayProfile {
        component,
        t_foot,
        h,
        foot_curvature: field.boundary_curvature(component, t_foot)?,
        distances: vec![],
        values: vec![],
        dropped: vec![],
        fit: None,
    };
    for &s in t_list {
        if s < d_min {
            let point = field.fermi_point(component, t_foot, s)?;
            return Err(Error::TooCloseToBoundary { point, distance: s, d_min });
        }
        let sup = window_sup(field, component, t_foot, s, w)?;
        if sup < UNDERFLOW {
            profile.dropped.push(s);
        } else {
            profile.distances.push(s);
            profile.values.push(-h * sup.ln());
        }
    }
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions {
    /// Largest polynomial degree; terms above 2 soak up the higher Taylor
    /// terms of the decay law so they do not bias `a₁` and `a₂`.
    pub degree: usize,
    /// Largest RMS residual for which coefficients are reported.
    pub residual_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { degree: 5, residual_threshold: 1e-3 }
    }
}

pub fn fit_decay(profile: &DecayProfile, t_range: (f64, f64)) -> Result<DecayProfile> {
    fit_decay_with(profile, t_range, &FitOptions::default())
}

/// Least-squares polynomial fit of the samples inside `t_range`.
pub fn fit_decay_with(profile: &DecayProfile, t_range: (f64, f64), opts: &FitOptions) -> Result<DecayProfile> {
    if opts.degree < 2 {
        return Err(Error::InvalidParameter("fit degree must be at least 2".into()));
    }
    let (ts, fs): (Vec<f64>, Vec<f64>) = profile
        .distances
        .iter()
        .zip(&profile.values)
        .filter(|(t, _)| **t >= t_range.0 && **t <= t_range.1)
        .map(|(t, f)| (*t, *f))
        .unzip();
    let needed = MIN_FIT_SAMPLES.max(opts.degree + 1);
    if ts.len() < needed {
        return Err(Error::TooFewSamples { found: ts.len(), needed });
    }
    let rms = |c: &[f64]| {
        (ts.iter().zip(&fs).map(|(t, f)| (f - horner(c, *t)).powi(2)).sum::<f64>() / ts.len() as f64).sqrt()
    };
    // Lowest degree that reproduces the data to rounding: extra nuisance
    // terms only add extrapolation noise to the coefficients at t = 0.
    let exact = EXACT_FIT_RTOL * fs.iter().fold(1.0f64, |m, f| m.max(f.abs()));
    let mut coefs = polyfit(&ts, &fs, 2)?;
    let mut residual = rms(&coefs);
    for d in 3..=opts.degree {
        if residual <= exact {
            break;
        }
        coefs = polyfit(&ts, &fs, d)?;
        residual = rms(&coefs);
    }
    if !(residual <= opts.residual_threshold) {
        return Err(Error::FitRefused { residual, threshold: opts.residual_threshold });
    }
    let mut out = profile.clone();
    out.fit = Some(DecayFit {
        a0: coefs[0],
        a1: coefs[1],
        a2: coefs[2],
        higher: coefs[3..].to_vec(),
        residual,
        t_range,
        samples: ts.len(),
    });
    Ok(out)
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * t + a)
}

/// Monomial coefficients of the least-squares fit, solved in the centred and
/// scaled variable `x = (t − m)/w` and expanded back.
fn polyfit(ts: &[f64], fs: &[f64], degree: usize) -> Result<Vec<f64>> {
    let lo = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = 0.5 * (lo + hi);
    let w = 0.5 * (hi - lo);
    if !(w > 0.0) {
        return Err(Error::RankDeficient);
    }
    let cols = degree + 1;
    let a = DMatrix::from_fn(ts.len(), cols, |i, j| ((ts[i] - m) / w).powi(j as i32));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::RankDeficient);
    }
    let b = svd.solve(&DVector::from_column_slice(fs), 0.0).map_err(|_| Error::RankDeficient)?;

    // Σ b_j ((t − m)/w)^j = Σ_j b_j w^{-j} Σ_i C(j,i) t^i (−m)^{j−i}
    let mut c = vec![0.0; cols];
    for j in 0..cols {
        let scale = b[j] / w.powi(j as i32);
        let mut binom = 1.0;
        for (i, ci) in c.iter_mut().enumerate().take(j + 1) {
            *ci += scale * binom * (-m).powi((j - i) as i32);
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
    }
    Ok(c)
}

/// Curvature-dependent constants of the decay bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedConstants {
    /// Infimum of the boundary curvature `Q`.
    pub inf_q: f64,
    /// Global quadratic lower bound `C = −3/2 + ½ inf Q`.
    pub c_global: f64,
    /// Sharp quadratic coefficient `½ inf Q`.
    pub sharp_quadratic: f64,
}

impl PredictedConstants {
    pub fn from_inf_curvature(inf_q: f64) -> Self {
        PredictedConstants { inf_q, c_global: -1.5 + 0.5 * inf_q, sharp_quadratic: 0.5 * inf_q }
    }

    /// Flat boundary, as on the cylinder.
    pub fn flat() -> Self {
        Self::from_inf_curvature(0.0)
    }

    /// `a(x') = −3/2 + ½Q(x')`; in two dimensions the fibre infimum is `Q`
    /// itself.
    pub fn local_bound(&self, q: f64) -> f64 {
        -1.5 + 0.5 * q
    }
}

pub fn predicted_constants(domain: &Domain) -> Result<PredictedConstants> {
    Ok(PredictedConstants::from_inf_curvature(domain.min_curvature()?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootVerdict {
    pub component: usize,
    pub t_foot: f64,
    pub h: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub residual: f64,
    pub foot_curvature: f64,
    /// `C − δ`.
    pub global_bound: f64,
    /// `a(x') − δ`.
    pub local_bound: f64,
    pub a1_ok: bool,
    pub global_ok: bool,
    pub local_ok: bool,
    pub a1_margin: f64,
    pub global_margin: f64,
    pub local_margin: f64,
}

impl FootVerdict {
    pub fn passed(&self) -> bool {
        self.a1_ok && self.global_ok && self.local_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub constants: PredictedConstants,
    pub delta: f64,
    pub a1_tolerance: f64,
    pub feet: Vec<FootVerdict>,
    pub passed: bool,
}

/// Checks every fitted profile against the first-order rate `a₁ = 1` and the
/// quadratic lower bounds `a₂ ≥ C − δ` and `a₂ ≥ a(x') − δ`.
pub fn verify_theorem1(
    constants: &PredictedConstants,
    profiles: &[DecayProfile],
    delta: f64,
    a1_tolerance: f64,
) -> Result<Theorem1Report> {
    if profiles.is_empty() {
        return Err(Error::InvalidParameter("no profiles to verify".into()));
    }
    let mut feet = Vec::with_capacity(profiles.len());
    for p in profiles {
        let fit = p
            .fit
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter(format!("profile at t_foot = {} is not fitted", p.t_foot)))?;
        let global_bound = constants.c_global - delta;
        let local_bound = constants.local_bound(p.foot_curvature) - delta;
        let a1_margin = a1_tolerance - (fit.a1 - 1.0).abs();
        feet.push(FootVerdict {
            component: p.component,
            t_foot: p.t_foot,
            h: p.h,
            a0: fit.a0,
            a1: fit.a1,
            a2: fit.a2,
            residual: fit.residual,
            foot_curvature: p.foot_curvature,
            global_bound,
            local_bound,
            a1_ok: a1_margin >= 0.0,
            global_ok: fit.a2 >= global_bound,
            local_ok: fit.a2 >= local_bound,
            a1_margin,
            global_margin: fit.a2 - global_bound,
            local_margin: fit.a2 - local_bound,
        });
    }
    let passed = feet.iter().all(FootVerdict::passed);
    Ok(Theorem1Report { constants: *constants, delta, a1_tolerance, feet, passed })
}

/// `n` equispaced distances covering `[lo, hi]`.
pub fn distance_list(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{CylinderModeField, DiskModeField, Parity};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    #[test]
    fn synthetic_quadratic_is_recovered() {
        let ts = distance_list(0.02, 0.2, 20);
        let fs: Vec<f64> = ts.iter().map(|t| 0.3 + t + 0.5 * t * t).collect();
        let p = fit_decay(&DecayProfile::synthetic(0.0, 0.05, 1.0, ts, fs), DEFAULT_FIT_RANGE).unwrap();
        let fit = p.fit.unwrap();
        assert_abs_diff_eq!(fit.a0, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.a1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.a2, 0.5, epsilon = 1e-12);
        assert!(fit.higher.is_empty());
        // a cubic needs the nuisance terms
        let ts = distance_list(0.02, 0.2, 20);
        let fs: Vec<f64> = ts.iter().map(|t| 0.3 + t + 0.5 * t * t - 2.0 * t * t * t).collect();
        let fit = fit_decay(&DecayProfile::synthetic(0.0, 0.05, 1.0, ts, fs), DEFAULT_FIT_RANGE).unwrap().fit.unwrap();
        assert_abs_diff_eq!(fit.a2, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.higher[0], -2.0, epsilon = 1e-8);
    }

    #[test]
    fn fit_preconditions() {
        let ts = distance_list(0.02, 0.2, 7);
        let fs = ts.clone();
        let p = DecayProfile::synthetic(0.0, 0.05, 1.0, ts, fs);
        assert!(matches!(fit_decay(&p, DEFAULT_FIT_RANGE), Err(Error::TooFewSamples { found: 7, .. })));
        let flat = DecayProfile::synthetic(0.0, 0.05, 1.0, vec![0.1; 10], vec![1.0; 10]);
        assert_eq!(fit_decay(&flat, DEFAULT_FIT_RANGE), Err(Error::RankDeficient));
        let ts = distance_list(0.02, 0.2, 30);
        let noisy: Vec<f64> = ts.iter().enumerate().map(|(i, _)| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let p = DecayProfile::synthetic(0.0, 0.05, 1.0, ts, noisy);
        assert!(matches!(fit_decay(&p, DEFAULT_FIT_RANGE), Err(Error::FitRefused { .. })));
    }

    #[test]
    fn disk_ray_samples() {
        let f = DiskModeField::new(1.0, 20).unwrap();
        let p = sample_normal_ray(&f, 0, 0.0, &[0.0, 0.1], None).unwrap();
        let h = 0.05;
        assert_abs_diff_eq!(p.values[0], 0.5 * h * TAU.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.values[1], -(0.9f64).ln() + 0.5 * h * TAU.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.foot_curvature, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cylinder_ray_sample() {
        let f = CylinderModeField { k: 20, parity: Parity::Even };
        let p = sample_normal_ray(&f, 0, 0.3, &[0.2], None).unwrap();
        assert!((p.values[0] - 0.2).abs() < 0.2, "{}", p.values[0]);
        assert!((p.values[0] - 0.2).abs() < 3.0 * f.h() * 20f64.ln());
    }

    #[test]
    fn underflow_is_dropped() {
        let f = DiskModeField::new(1.0, 400).unwrap();
        let p = sample_normal_ray(&f, 0, 0.0, &[0.1, 0.9], Some(0.0)).unwrap();
        assert_eq!(p.distances, vec![0.1]);
        assert_eq!(p.dropped, vec![0.9]);
    }

    #[test]
    fn predicted_constant_examples() {
        let disk = predicted_constants(&Domain::disk(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(disk.c_global, -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(disk.sharp_quadratic, 0.5, epsilon = 1e-9);
        let ann = predicted_constants(&Domain::annulus(0.5, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(ann.inf_q, -2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ann.c_global, -2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(ann.sharp_quadratic, -1.0, epsilon = 1e-9);
        let cyl = PredictedConstants::flat();
        assert_eq!((cyl.c_global, cyl.sharp_quadratic), (-1.5, 0.0));
    }

    #[test]
    fn verification_pass_and_negative_control() {
        let ts = distance_list(0.02, 0.2, 20);
        let make = |a2: f64, q: f64| {
            let fs: Vec<f64> = ts.iter().map(|t| 0.1 + t + a2 * t * t).collect();
            fit_decay(&DecayProfile::synthetic(0.0, 0.05, q, ts.clone(), fs), DEFAULT_FIT_RANGE).unwrap()
        };
        let disk = PredictedConstants::from_inf_curvature(1.0);
        let ok = verify_theorem1(&disk, &[make(0.5, 1.0)], DEFAULT_DELTA, DEFAULT_A1_TOL).unwrap();
        assert!(ok.passed);
        assert_abs_diff_eq!(ok.feet[0].global_margin, 1.5 + DEFAULT_DELTA, epsilon = 1e-10);
        let bad = verify_theorem1(&disk, &[make(-10.0, 1.0)], DEFAULT_DELTA, DEFAULT_A1_TOL).unwrap();
        assert!(!bad.passed && !bad.feet[0].local_ok);
        let unfitted = DecayProfile::synthetic(0.0, 0.05, 1.0, vec![], vec![]);
        assert!(verify_theorem1(&disk, &[unfitted], DEFAULT_DELTA, DEFAULT_A1_TOL).is_err());
    }
}
