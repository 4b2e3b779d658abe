//! Closed-form Steklov spectra and eigenfunctions for the disk, the flat
//! cylinder `(-1, 1) × S¹` and the annulus `r₀ < |x| < 1`.
//!
//! All eigenfunctions are normalized to unit `L²(∂Ω)` norm.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SteklovField;
use crate::geometry::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Disk,
    CylinderEven,
    CylinderOdd,
    AnnulusBranch1,
    AnnulusBranch2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpectrumEntry {
    /// Angular wavenumber.
    pub index: usize,
    pub sigma: f64,
    pub multiplicity: usize,
    pub family: Family,
}

pub fn disk_spectrum(radius: f64, k: usize) -> f64 {
    k as f64 / radius
}

/// `(2πR)^{-1/2} (r/R)^k e^{ikθ}`.
pub fn disk_mode(radius: f64, k: usize, r: f64, theta: f64) -> Complex64 {
    let amp = (TAU * radius).sqrt().recip() * (r / radius).powi(k as i32);
    Complex64::from_polar(amp, k as f64 * theta)
}

/// `p_k(σ)`, whose roots are the annulus eigenvalues for wavenumber `k ≥ 1`.
pub fn annulus_polynomial(r0: f64, k: usize, sigma: f64) -> f64 {
    let kf = k as f64;
    let q = r0.powi(2 * k as i32);
    sigma * sigma - sigma * kf * ((1.0 + r0) / r0) * ((1.0 + q) / (1.0 - q)) + kf * kf / r0
}

/// Both annulus eigenvalues for wavenumber `k`, ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusRoots {
    pub sigma: [f64; 2],
    /// `k = 0`: the roots come from `u = a + b log r`, not from `p_k`.
    pub radial_branch: bool,
}

pub fn annulus_spectrum(r0: f64, k: usize) -> Result<AnnulusRoots> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidParameter(format!("annulus needs 0 < r0 < 1, got {r0}")));
    }
    if k == 0 {
        // b = σa on the outer circle, -b/r0 = σ(a + b log r0) on the inner one.
        let sigma = (1.0 + r0) / (r0 * (1.0 / r0).ln());
        return Ok(AnnulusRoots { sigma: [0.0, sigma], radial_branch: true });
    }
    let kf = k as f64;
    let q = r0.powi(2 * k as i32);
    let b = kf * ((1.0 + r0) / r0) * ((1.0 + q) / (1.0 - q));
    let c = kf * kf / r0;
    let disc = (b * b - 4.0 * c).sqrt();
    // Larger root directly, smaller one via Vieta to avoid cancellation.
    let big = 0.5 * (b + disc);
    Ok(AnnulusRoots { sigma: [c / big, big], radial_branch: false })
}

/// Annulus eigenfunction `C e^{ikθ}(r^k + (k-σ)/(k+σ) r^{-k})`, or
/// `C(1 + σ log r)` for `k = 0`, normalized on both boundary circles.
pub fn annulus_mode(r0: f64, k: usize, sigma: f64, r: f64, theta: f64) -> Result<Complex64> {
    let kf = k as f64;
    if k == 0 {
        let inner = 1.0 + sigma * r0.ln();
        let c = (TAU * (1.0 + r0 * inner * inner)).sqrt().recip();
        return Ok(Complex64::new(c * (1.0 + sigma * r.ln()), 0.0));
    }
    if (kf + sigma).abs() < 1e-14 * kf.max(1.0) {
        return Err(Error::InvalidParameter(format!("sigma = -k = {sigma} is a pole of the mode coefficient")));
    }
    let coef = (kf - sigma) / (kf + sigma);
    let radial = |rr: f64| rr.powi(k as i32) + coef * rr.powi(-(k as i32));
    let outer = radial(1.0);
    let inner = radial(r0);
    let c = (TAU * (outer * outer + r0 * inner * inner)).sqrt().recip();
    Ok(Complex64::from_polar(c * radial(r), kf * theta))
}

/// Even and odd eigenvalues `(λ tanh λ, λ coth λ)` of the flat cylinder.
pub fn cylinder_spectrum(lambda: f64) -> (f64, f64) {
    if lambda == 0.0 {
        return (0.0, 1.0);
    }
    (lambda * lambda.tanh(), lambda / lambda.tanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Cylinder eigenfunction over the unit-circle cross-section (`λ = k`), at
/// angle `x` and height `t ∈ [-1, 1]`.
pub fn cylinder_mode(k: usize, parity: Parity, x: f64, t: f64) -> Complex64 {
    let l = k as f64;
    let profile = match parity {
        // cosh(λt)/cosh(λ) without overflow for large λ
        Parity::Even => ((-l * (1.0 - t.abs())).exp() * (1.0 + (-2.0 * l * t.abs()).exp())) / (1.0 + (-2.0 * l).exp()),
        Parity::Odd if k == 0 => t,
        Parity::Odd => {
            t.signum() * ((-l * (1.0 - t.abs())).exp() * (1.0 - (-2.0 * l * t.abs()).exp())) / (1.0 - (-2.0 * l).exp())
        }
    };
    // |trace| = 1 on each of the two boundary circles of length 2π.
    Complex64::from_polar(profile / (2.0 * TAU).sqrt(), l * x)
}

/// Merged reference spectrum with wavenumbers `0..=k_max`.
pub fn reference_spectrum(example: &ReferenceDomain, k_max: usize) -> Result<Vec<ReferenceSpectrumEntry>> {
    let mut out = Vec::new();
    for k in 0..=k_max {
        let mult = if k == 0 { 1 } else { 2 };
        match *example {
            ReferenceDomain::Disk { radius } => out.push(ReferenceSpectrumEntry {
                index: k,
                sigma: disk_spectrum(radius, k),
                multiplicity: mult,
                family: Family::Disk,
            }),
            ReferenceDomain::Annulus { r0 } => {
                let roots = annulus_spectrum(r0, k)?;
                for (sigma, family) in roots.sigma.into_iter().zip([Family::AnnulusBranch1, Family::AnnulusBranch2]) {
                    out.push(ReferenceSpectrumEntry { index: k, sigma, multiplicity: mult, family });
                }
            }
            ReferenceDomain::Cylinder => {
                let (even, odd) = cylinder_spectrum(k as f64);
                out.push(ReferenceSpectrumEntry {
                    index: k,
                    sigma: even,
                    multiplicity: mult,
                    family: Family::CylinderEven,
                });
                out.push(ReferenceSpectrumEntry {
                    index: k,
                    sigma: odd,
                    multiplicity: mult,
                    family: Family::CylinderOdd,
                });
            }
        }
    }
    out.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    Ok(out)
}

/// Expands a reference spectrum into the list of eigenvalues with repeats.
pub fn with_multiplicity(entries: &[ReferenceSpectrumEntry]) -> Vec<f64> {
    entries.iter().flat_map(|e| std::iter::repeat_n(e.sigma, e.multiplicity)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceDomain {
    Disk { radius: f64 },
    Annulus { r0: f64 },
    Cylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayExample {
    Disk {
        radius: f64,
    },
    /// Near the inner circle of the annulus, branch `σ ≈ k/r₀`.
    AnnulusInner {
        r0: f64,
    },
    /// Near the outer unit circle of the annulus, branch `σ ≈ k`.
    AnnulusOuter,
    Cylinder,
}

/// Exact rate function `d ↦ d_exact(d)` with `|u_h| ∝ e^{-d_exact/h}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactDecayLaw {
    pub example: DecayExample,
    pub linear: f64,
    pub quadratic: f64,
}

impl ExactDecayLaw {
    pub fn eval(&self, d: f64) -> f64 {
        match self.example {
            DecayExample::Disk { radius } => -radius * (-d / radius).ln_1p(),
            DecayExample::AnnulusOuter => -(-d).ln_1p(),
            DecayExample::AnnulusInner { r0 } => r0 * (d / r0).ln_1p(),
            DecayExample::Cylinder => d,
        }
    }
}

pub fn exact_decay_law(example: DecayExample) -> ExactDecayLaw {
    let quadratic = match example {
        DecayExample::Disk { radius } => 0.5 / radius,
        DecayExample::AnnulusOuter => 0.5,
        DecayExample::AnnulusInner { r0 } => -0.5 / r0,
        DecayExample::Cylinder => 0.0,
    };
    ExactDecayLaw { example, linear: 1.0, quadratic }
}

/// Closed-form disk eigenfunction as a [`SteklovField`].
#[derive(Debug, Clone)]
pub struct DiskModeField {
    radius: f64,
    k: usize,
    domain: Domain,
}

impl DiskModeField {
    pub fn new(radius: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("the constant mode has no semiclassical parameter".into()));
        }
        Ok(DiskModeField { radius, k, domain: Domain::disk(radius)? })
    }
}

impl SteklovField for DiskModeField {
    fn h(&self) -> f64 {
        1.0 / disk_spectrum(self.radius, self.k)
    }

    fn eval(&self, p: [f64; 2]) -> Result<Complex64> {
        Ok(disk_mode(self.radius, self.k, p[0].hypot(p[1]), p[1].atan2(p[0])))
    }

    fn fermi_point(&self, component: usize, t: f64, s: f64) -> Result<[f64; 2]> {
        Ok(self.domain.fermi_to_cartesian(component, t, s)?.position)
    }

    fn boundary_speed(&self, component: usize, t: f64) -> f64 {
        self.domain.component(component).speed(t)
    }

    fn boundary_curvature(&self, component: usize, t: f64) -> Result<f64> {
        self.domain.component(component).curvature(t)
    }

    fn boundary_sup(&self) -> f64 {
        (TAU * self.radius).sqrt().recip()
    }
}

/// Closed-form annulus eigenfunction (`r₀ < r < 1`).
#[derive(Debug, Clone)]
pub struct AnnulusModeField {
    r0: f64,
    k: usize,
    sigma: f64,
    domain: Domain,
}

impl AnnulusModeField {
    /// `branch` is 0 for the smaller root, 1 for the larger.
    pub fn new(r0: f64, k: usize, branch: usize) -> Result<Self> {
        let roots = annulus_spectrum(r0, k)?;
        let sigma = *roots
            .sigma
            .get(branch)
            .ok_or_else(|| Error::InvalidParameter(format!("annulus branch {branch} does not exist")))?;
        if sigma <= 0.0 {
            return Err(Error::InvalidParameter("the constant mode has no semiclassical parameter".into()));
        }
        Ok(AnnulusModeField { r0, k, sigma, domain: Domain::annulus(r0, 1.0)? })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl SteklovField for AnnulusModeField {
    fn h(&self) -> f64 {
        1.0 / self.sigma
    }

    fn eval(&self, p: [f64; 2]) -> Result<Complex64> {
        annulus_mode(self.r0, self.k, self.sigma, p[0].hypot(p[1]), p[1].atan2(p[0]))
    }

    fn fermi_point(&self, component: usize, t: f64, s: f64) -> Result<[f64; 2]> {
        Ok(self.domain.fermi_to_cartesian(component, t, s)?.position)
    }

    fn boundary_speed(&self, component: usize, t: f64) -> f64 {
        self.domain.component(component).speed(t)
    }

    fn boundary_curvature(&self, component: usize, t: f64) -> Result<f64> {
        self.domain.component(component).curvature(t)
    }

    fn boundary_sup(&self) -> f64 {
        let a = annulus_mode(self.r0, self.k, self.sigma, 1.0, 0.0).map(|z| z.norm()).unwrap_or(0.0);
        let b = annulus_mode(self.r0, self.k, self.sigma, self.r0, 0.0).map(|z| z.norm()).unwrap_or(0.0);
        a.max(b)
    }
}

/// Closed-form flat-cylinder eigenfunction. Chart: `(angle, height)`;
/// component 0 is the top circle `t = 1`, component 1 the bottom `t = -1`.
#[derive(Debug, Clone, Copy)]
pub struct CylinderModeField {
    pub k: usize,
    pub parity: Parity,
}

impl CylinderModeField {
    pub fn sigma(&self) -> f64 {
        let (even, odd) = cylinder_spectrum(self.k as f64);
        match self.parity {
            Parity::Even => even,
            Parity::Odd => odd,
        }
    }
}

impl SteklovField for CylinderModeField {
    fn h(&self) -> f64 {
        1.0 / self.sigma()
    }

    fn eval(&self, p: [f64; 2]) -> Result<Complex64> {
        if !(p[1].abs() <= 1.0) {
            return Err(Error::NotInterior { point: p });
        }
        Ok(cylinder_mode(self.k, self.parity, p[0], p[1]))
    }

    fn fermi_point(&self, component: usize, t: f64, s: f64) -> Result<[f64; 2]> {
        match component {
            0 => Ok([t, 1.0 - s]),
            1 => Ok([t, -1.0 + s]),
            _ => Err(Error::InvalidParameter(format!("cylinder has no component {component}"))),
        }
    }

    fn boundary_speed(&self, _component: usize, _t: f64) -> f64 {
        1.0
    }

    fn boundary_curvature(&self, _component: usize, _t: f64) -> Result<f64> {
        Ok(0.0)
    }

    fn boundary_sup(&self) -> f64 {
        (2.0 * TAU).sqrt().recip()
    }
}
