//! Harmonic extension of a Steklov eigenfunction from its boundary trace.
//!
//! Green's representation with `∂_ν u = σ u` on the boundary gives
//! `u(z) = σ ∫ Φ(z,y) φ(y) ds_y − ∫ ∂_{ν_y}Φ(z,y) φ(y) ds_y`, evaluated here
//! by the trapezoid rule on an FFT-upsampled trace.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtn::SteklovMode;
use crate::error::{Error, Result};
use crate::field::SteklovField;
use crate::fourier;
use crate::geometry::Domain;

pub const DEFAULT_UPSAMPLING: usize = 8;

#[derive(Debug, Clone, Copy)]
struct FineNode {
    point: [f64; 2],
    normal: [f64; 2],
    weight: f64,
}

/// A computed mode together with the quadrature needed to evaluate its
/// harmonic extension.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    mode: SteklovMode,
    upsampling: usize,
    d_min: f64,
    nodes: Vec<FineNode>,
    trace: Vec<Complex64>,
    boundary_sup: f64,
}

impl ExtensionField {
    pub fn new(mode: &SteklovMode) -> Result<Self> {
        Self::with_upsampling(mode, DEFAULT_UPSAMPLING)
    }

    pub fn with_upsampling(mode: &SteklovMode, upsampling: usize) -> Result<Self> {
        if upsampling == 0 {
            return Err(Error::InvalidParameter("upsampling factor must be positive".into()));
        }
        let grid = mode.grid();
        let n = grid.per_component();
        let fine = n * upsampling;
        let domain = grid.domain();
        let mut nodes = Vec::with_capacity(fine * domain.components().len());
        let mut trace = Vec::with_capacity(nodes.capacity());
        let mut longest: f64 = 0.0;
        for (c, curve) in domain.components().iter().enumerate() {
            longest = longest.max(curve.length());
            for t in fourier::grid(fine) {
                nodes.push(FineNode {
                    point: curve.point(t),
                    normal: curve.outward_normal(t),
                    weight: curve.speed(t) * TAU / fine as f64,
                });
            }
            trace.extend(fourier::upsample(&mode.trace[grid.component_range(c)], upsampling));
        }
        let boundary_sup = trace.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(ExtensionField {
            mode: mode.clone(),
            upsampling,
            d_min: 6.0 * longest / fine as f64,
            nodes,
            trace,
            boundary_sup,
        })
    }

    pub fn mode(&self) -> &SteklovMode {
        &self.mode
    }

    pub fn domain(&self) -> &Domain {
        self.mode.grid().domain()
    }

    pub fn upsampling(&self) -> usize {
        self.upsampling
    }

    /// Smallest boundary distance at which evaluation is trusted.
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    fn check(&self, p: [f64; 2]) -> Result<()> {
        let (distance, _) = self.domain().distance_to_boundary(p)?;
        if distance < self.d_min {
            return Err(Error::TooCloseToBoundary { point: p, distance, d_min: self.d_min });
        }
        Ok(())
    }

    /// Single-layer term `σ∫Φφ` and double-layer term `−∫∂_νΦ φ`, without
    /// the distance check.
    pub fn split_unchecked(&self, p: [f64; 2]) -> (Complex64, Complex64) {
        let mut single = Complex64::new(0.0, 0.0);
        let mut double = Complex64::new(0.0, 0.0);
        for (node, phi) in self.nodes.iter().zip(&self.trace) {
            let dx = node.point[0] - p[0];
            let dy = node.point[1] - p[1];
            let r2 = dx * dx + dy * dy;
            let g = -r2.ln() / (2.0 * TAU);
            let dg = -(dx * node.normal[0] + dy * node.normal[1]) / (TAU * r2);
            single += phi * (g * node.weight);
            double -= phi * (dg * node.weight);
        }
        (single * self.mode.sigma, double)
    }

    pub fn split(&self, p: [f64; 2]) -> Result<(Complex64, Complex64)> {
        self.check(p)?;
        Ok(self.split_unchecked(p))
    }

    pub fn eval_unchecked(&self, p: [f64; 2]) -> Complex64 {
        let (a, b) = self.split_unchecked(p);
        a + b
    }

    /// Evaluates at every point; fails on the first point closer than
    /// [`ExtensionField::d_min`] to the boundary.
    pub fn extend(&self, points: &[[f64; 2]]) -> Result<Vec<Complex64>> {
        points.par_iter().map(|&p| self.eval(p)).collect()
    }
}

impl SteklovField for ExtensionField {
    fn h(&self) -> f64 {
        1.0 / self.mode.sigma
    }

    fn eval(&self, p: [f64; 2]) -> Result<Complex64> {
        self.check(p)?;
        Ok(self.eval_unchecked(p))
    }

    fn fermi_point(&self, component: usize, t: f64, s: f64) -> Result<[f64; 2]> {
        Ok(self.domain().fermi_to_cartesian(component, t, s)?.position)
    }

    fn boundary_speed(&self, component: usize, t: f64) -> f64 {
        self.domain().component(component).speed(t)
    }

    fn boundary_curvature(&self, component: usize, t: f64) -> Result<f64> {
        self.domain().component(component).curvature(t)
    }

    fn boundary_sup(&self) -> f64 {
        self.boundary_sup
    }

    fn min_reliable_distance(&self) -> f64 {
        self.d_min
    }
}

/// Convenience wrapper around [`ExtensionField::extend`] with the default
/// upsampling.
pub fn extend(mode: &SteklovMode, points: &[[f64; 2]]) -> Result<Vec<Complex64>> {
    ExtensionField::new(mode)?.extend(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub max_interior: f64,
    pub boundary_sup: f64,
    /// `max_interior / boundary_sup`.
    pub ratio: f64,
    pub worst_point: [f64; 2],
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the largest interior modulus on `points` with the boundary sup.
/// Points the field cannot evaluate are an error; a violation is reported
/// through [`MaxPrincipleReport::passed`].
pub fn max_principle_check<F: SteklovField + ?Sized>(
    field: &F,
    points: &[[f64; 2]],
    tolerance: f64,
) -> Result<MaxPrincipleReport> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("no interior points to check".into()));
    }
    let values = points.par_iter().map(|&p| field.eval(p).map(|u| u.norm())).collect::<Result<Vec<_>>>()?;
    let (worst, max_interior) =
        values.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty");
    let boundary_sup = field.boundary_sup();
    let ratio = max_interior / boundary_sup;
    Ok(MaxPrincipleReport {
        max_interior,
        boundary_sup,
        ratio,
        worst_point: points[worst],
        tolerance,
        passed: ratio <= 1.0 + tolerance,
    })
}

/// Cell centres of an `n × n` bounding-box lattice inside `domain` at boundary
/// distance at least `d_min`, for maximum-principle sweeps.
pub fn interior_lattice(domain: &Domain, n: usize, d_min: f64) -> Vec<[f64; 2]> {
    let [[x0, y0], [x1, y1]] = domain.bounding_box();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = [x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64, y0 + (y1 - y0) * (j as f64 + 0.5) / n as f64];
            if let Ok((d, _)) = domain.distance_to_boundary(p) {
                if d >= d_min {
                    out.push(p);
                }
            }
        }
    }
    out
}
