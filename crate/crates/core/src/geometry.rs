//! Planar analytic boundary curves, domains bounded by them, and Fermi
//! (boundary-normal) coordinates.
//!
//! Every curve is parametrized over `t ∈ [0, 2π)` and oriented so that the
//! domain lies to its left: outer components run counterclockwise, holes
//! clockwise. With that convention the signed curvature `q' × q'' / |q'|³`
//! is the boundary curvature seen from inside the domain, `+1/R` on the
//! boundary of a disk and `-1/r₀` on the inner circle of an annulus.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter samples used to seed nearest-point searches.
pub const DISTANCE_SEED_SAMPLES: usize = 1024;

const MIN_SPEED: f64 = 1e-12;
const NEWTON_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveShape {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Star-shaped curve `r(θ) = mean + Σ cos[k-1] cos kθ + sin[k-1] sin kθ`.
    RadialFourier {
        mean: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl CurveShape {
    /// Radius function and its first two θ-derivatives (radial shapes only).
    fn radial(&self, theta: f64) -> Option<[f64; 3]> {
        match self {
            CurveShape::Circle { radius } => Some([*radius, 0.0, 0.0]),
            CurveShape::RadialFourier { mean, cos, sin } => {
                let mut r = [*mean, 0.0, 0.0];
                for (k, c) in cos.iter().enumerate() {
                    let kf = (k + 1) as f64;
                    let (s, co) = (kf * theta).sin_cos();
                    r[0] += c * co;
                    r[1] -= c * kf * s;
                    r[2] -= c * kf * kf * co;
                }
                for (k, c) in sin.iter().enumerate() {
                    let kf = (k + 1) as f64;
                    let (s, co) = (kf * theta).sin_cos();
                    r[0] += c * s;
                    r[1] += c * kf * co;
                    r[2] -= c * kf * kf * s;
                }
                Some(r)
            }
            CurveShape::Ellipse { .. } => None,
        }
    }

    /// Counterclockwise point and derivatives relative to the center.
    fn eval_ccw(&self, t: f64) -> [[f64; 2]; 3] {
        let (s, c) = t.sin_cos();
        match self {
            CurveShape::Ellipse { a, b } => [[a * c, b * s], [-a * s, b * c], [-a * c, -b * s]],
            _ => {
                let [r, dr, ddr] = self.radial(t).expect("radial shape");
                [
                    [r * c, r * s],
                    [dr * c - r * s, dr * s + r * c],
                    [ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s],
                ]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            CurveShape::Circle { radius } => radius.is_finite() && *radius > 0.0,
            CurveShape::Ellipse { a, b } => a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0,
            CurveShape::RadialFourier { mean, cos, sin } => {
                let amp: f64 = cos.iter().chain(sin).map(|c| c.abs()).sum();
                mean.is_finite() && amp.is_finite() && *mean > amp
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!("bad curve parameters {self:?}")))
        }
    }
}

/// A closed analytic curve `t ↦ q(t)`, 2π-periodic in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    shape: CurveShape,
    center: [f64; 2],
    clockwise: bool,
    length: f64,
}

impl BoundaryCurve {
    pub fn new(shape: CurveShape, center: [f64; 2], clockwise: bool) -> Result<Self> {
        shape.validate()?;
        let mut curve = BoundaryCurve { shape, center, clockwise, length: 0.0 };
        // Trapezoid on a periodic analytic integrand converges geometrically.
        let n = 4096;
        let mut len = 0.0;
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            let speed = curve.speed(t);
            if speed < MIN_SPEED {
                return Err(Error::DegenerateParametrization { t, speed });
            }
            len += speed;
        }
        curve.length = len * TAU / n as f64;
        Ok(curve)
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Self::new(CurveShape::Circle { radius }, [0.0; 2], false)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(CurveShape::Ellipse { a, b }, [0.0; 2], false)
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn is_clockwise(&self) -> bool {
        self.clockwise
    }

    /// Total arclength.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// `[q(t), q'(t), q''(t)]`.
    pub fn derivatives(&self, t: f64) -> [[f64; 2]; 3] {
        let t = t.rem_euclid(TAU);
        if self.clockwise {
            let [p, d1, d2] = self.shape.eval_ccw(TAU - t);
            [[p[0] + self.center[0], p[1] + self.center[1]], [-d1[0], -d1[1]], d2]
        } else {
            let [p, d1, d2] = self.shape.eval_ccw(t);
            [[p[0] + self.center[0], p[1] + self.center[1]], d1, d2]
        }
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        self.derivatives(t)[0]
    }

    pub fn speed(&self, t: f64) -> f64 {
        let d = self.derivatives(t)[1];
        d[0].hypot(d[1])
    }

    /// Unit normal pointing to the left of the direction of travel, i.e. into
    /// the domain this curve bounds.
    pub fn inward_normal(&self, t: f64) -> [f64; 2] {
        let d = self.derivatives(t)[1];
        let s = d[0].hypot(d[1]);
        [-d[1] / s, d[0] / s]
    }

    pub fn outward_normal(&self, t: f64) -> [f64; 2] {
        let n = self.inward_normal(t);
        [-n[0], -n[1]]
    }

    /// Signed curvature, positive where the curve bends toward the domain.
    pub fn curvature(&self, t: f64) -> Result<f64> {
        let [_, d1, d2] = self.derivatives(t);
        let speed = d1[0].hypot(d1[1]);
        if speed < MIN_SPEED {
            return Err(Error::DegenerateParametrization { t, speed });
        }
        Ok((d1[0] * d2[1] - d1[1] * d2[0]) / speed.powi(3))
    }

    /// `∮ κ ds` by the periodic trapezoid rule on `n` nodes.
    pub fn total_turning(&self, n: usize) -> Result<f64> {
        let mut acc = 0.0;
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            acc += self.curvature(t)? * self.speed(t);
        }
        Ok(acc * TAU / n as f64)
    }

    /// Whether `p` lies strictly inside the region enclosed by the curve,
    /// regardless of orientation.
    pub fn encloses(&self, p: [f64; 2]) -> bool {
        let x = p[0] - self.center[0];
        let y = p[1] - self.center[1];
        match &self.shape {
            CurveShape::Ellipse { a, b } => (x / a).powi(2) + (y / b).powi(2) < 1.0,
            shape => {
                let r = x.hypot(y);
                let theta = y.atan2(x);
                r < shape.radial(theta).expect("radial shape")[0]
            }
        }
    }

    /// Minimum and maximum of the curvature, from dense sampling refined by
    /// golden-section search.
    pub fn curvature_extrema(&self) -> Result<(f64, f64)> {
        let n = 512;
        let ks = (0..n).map(|j| self.curvature(TAU * j as f64 / n as f64)).collect::<Result<Vec<_>>>()?;
        let h = TAU / n as f64;
        let imin = argmin(&ks, |k| k);
        let imax = argmin(&ks, |k| -k);
        let t0 = imin as f64 * h;
        let t1 = imax as f64 * h;
        let kmin = golden_min(|t| self.curvature(t).unwrap_or(f64::INFINITY), t0 - h, t0 + h).1;
        let kmax = -golden_min(|t| -self.curvature(t).unwrap_or(f64::NEG_INFINITY), t1 - h, t1 + h).1;
        Ok((kmin.min(ks[imin]), kmax.max(ks[imax])))
    }

    /// Closest boundary parameter to `p` and the distance to it.
    pub fn nearest(&self, p: [f64; 2], seeds: usize) -> (f64, f64) {
        let dist2 = |t: f64| {
            let q = self.point(t);
            (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)
        };
        let h = TAU / seeds as f64;
        let samples: Vec<f64> = (0..seeds).map(|j| dist2(j as f64 * h)).collect();
        let j0 = argmin(&samples, |d| d);
        let mut t = j0 as f64 * h;
        let mut best = (t, samples[j0]);
        for _ in 0..50 {
            let [q, d1, d2] = self.derivatives(t);
            let r = [q[0] - p[0], q[1] - p[1]];
            let g = r[0] * d1[0] + r[1] * d1[1];
            let dg = d1[0] * d1[0] + d1[1] * d1[1] + r[0] * d2[0] + r[1] * d2[1];
            if dg <= 0.0 {
                break;
            }
            let step = g / dg;
            let step = step.clamp(-h, h);
            t -= step;
            let d = dist2(t);
            if d <= best.1 {
                best = (t, d);
            }
            if step.abs() < NEWTON_TOL {
                break;
            }
        }
        if (best.0 - j0 as f64 * h).abs() > h {
            // Newton wandered off its bracket; fall back to a bracketed search.
            let c = j0 as f64 * h;
            let (t, d) = golden_min(dist2, c - h, c + h);
            if d < best.1 {
                best = (t, d);
            }
        }
        (best.0.rem_euclid(TAU), best.1.sqrt())
    }
}

fn argmin(xs: &[f64], key: impl Fn(f64) -> f64) -> usize {
    xs.iter().enumerate().min_by(|a, b| key(*a.1).total_cmp(&key(*b.1))).map(|(i, _)| i).unwrap_or(0)
}

/// Golden-section minimization on `[a, b]`; returns `(argmin, min)`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// A boundary point together with an inward normal offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiPoint {
    pub component: usize,
    pub t_foot: f64,
    pub distance: f64,
    pub position: [f64; 2],
}

/// Result of [`Domain::fermi_to_cartesian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiMap {
    pub position: [f64; 2],
    /// Set when the offset exceeds half the smallest focal distance of the
    /// component, where normal coordinates may fold.
    pub fold_warning: bool,
}

/// A bounded planar domain: one outer curve and any number of holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    components: Vec<BoundaryCurve>,
    bbox: [[f64; 2]; 2],
    /// Per component: the largest inward-bending curvature (0 if none).
    max_positive_curvature: Vec<f64>,
}

impl Domain {
    /// `outer` must be counterclockwise; each hole must be clockwise, lie
    /// inside `outer`, and be disjoint from the other holes.
    pub fn new(outer: BoundaryCurve, holes: Vec<BoundaryCurve>) -> Result<Self> {
        if outer.is_clockwise() {
            return Err(Error::InvalidDomain("outer boundary must be counterclockwise".into()));
        }
        let probe = 256;
        for (i, hole) in holes.iter().enumerate() {
            if !hole.is_clockwise() {
                return Err(Error::InvalidDomain(format!("hole {i} must be clockwise")));
            }
            for j in 0..probe {
                let p = hole.point(TAU * j as f64 / probe as f64);
                if !outer.encloses(p) {
                    return Err(Error::InvalidDomain(format!("hole {i} is not inside the outer boundary")));
                }
                if holes.iter().enumerate().any(|(k, other)| k != i && other.encloses(p)) {
                    return Err(Error::InvalidDomain(format!("hole {i} overlaps another hole")));
                }
            }
        }
        let mut components = vec![outer];
        components.extend(holes);

        let mut bbox = [[f64::INFINITY; 2], [f64::NEG_INFINITY; 2]];
        for j in 0..1024 {
            let p = components[0].point(TAU * j as f64 / 1024.0);
            for a in 0..2 {
                bbox[0][a] = bbox[0][a].min(p[a]);
                bbox[1][a] = bbox[1][a].max(p[a]);
            }
        }
        let max_positive_curvature = components
            .iter()
            .map(|c| c.curvature_extrema().map(|(_, kmax)| kmax.max(0.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Domain { components, bbox, max_positive_curvature })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(BoundaryCurve::circle(radius)?, vec![])
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(BoundaryCurve::ellipse(a, b)?, vec![])
    }

    /// Concentric annulus `r0 < |x| < outer`.
    pub fn annulus(r0: f64, outer: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 < outer) {
            return Err(Error::InvalidDomain(format!("annulus needs 0 < r0 < R, got r0={r0}, R={outer}")));
        }
        Self::new(
            BoundaryCurve::circle(outer)?,
            vec![BoundaryCurve::new(CurveShape::Circle { radius: r0 }, [0.0; 2], true)?],
        )
    }

    pub fn radial_fourier(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::new(BoundaryCurve::new(CurveShape::RadialFourier { mean, cos, sin }, [0.0; 2], false)?, vec![])
    }

    pub fn components(&self) -> &[BoundaryCurve] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &BoundaryCurve {
        &self.components[i]
    }

    pub fn bounding_box(&self) -> [[f64; 2]; 2] {
        self.bbox
    }

    /// Largest extent of the bounding box.
    pub fn diameter(&self) -> f64 {
        (self.bbox[1][0] - self.bbox[0][0]).max(self.bbox[1][1] - self.bbox[0][1])
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(BoundaryCurve::length).sum()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.components[0].encloses(p) && !self.components[1..].iter().any(|c| c.encloses(p))
    }

    /// Offset beyond which normal coordinates from component `i` may fold.
    pub fn fold_distance(&self, i: usize) -> f64 {
        let k = self.max_positive_curvature[i];
        if k > 0.0 {
            0.5 / k
        } else {
            f64::INFINITY
        }
    }

    /// Distance from an interior point to the boundary and its foot point.
    pub fn distance_to_boundary(&self, x: [f64; 2]) -> Result<(f64, FermiPoint)> {
        if !x.iter().all(|v| v.is_finite()) || !self.contains(x) {
            return Err(Error::NotInterior { point: x });
        }
        let (component, (t_foot, distance)) = self
            .components
            .iter()
            .map(|c| c.nearest(x, DISTANCE_SEED_SAMPLES))
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .expect("at least one component");
        if distance <= 0.0 {
            return Err(Error::NotInterior { point: x });
        }
        Ok((distance, FermiPoint { component, t_foot, distance, position: x }))
    }

    pub fn fermi_to_cartesian(&self, component: usize, t_foot: f64, distance: f64) -> Result<FermiMap> {
        if component >= self.components.len() {
            return Err(Error::InvalidParameter(format!("no boundary component {component}")));
        }
        if !(distance >= 0.0) || !distance.is_finite() || !t_foot.is_finite() {
            return Err(Error::InvalidParameter(format!("bad Fermi coordinates ({t_foot}, {distance})")));
        }
        let c = &self.components[component];
        let q = c.point(t_foot);
        let n = c.inward_normal(t_foot);
        Ok(FermiMap {
            position: [q[0] + distance * n[0], q[1] + distance * n[1]],
            fold_warning: distance > self.fold_distance(component),
        })
    }

    /// Infimum of the signed boundary curvature over all components.
    pub fn min_curvature(&self) -> Result<f64> {
        let mut kmin = f64::INFINITY;
        for c in &self.components {
            kmin = kmin.min(c.curvature_extrema()?.0);
        }
        Ok(kmin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn curve_points() {
        let c = BoundaryCurve::circle(1.0).unwrap();
        assert_abs_diff_eq!(c.point(0.0)[0], 1.0, epsilon = 1e-15);
        let p = c.point(PI / 2.0);
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 1.0, epsilon = 1e-15);
        let e = BoundaryCurve::ellipse(2.0, 1.0).unwrap();
        let p = e.point(PI);
        assert_abs_diff_eq!(p[0], -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-15);
        // t is read mod 2π
        let p = c.point(TAU + 0.3);
        assert_abs_diff_eq!(p[0], 0.3f64.cos(), epsilon = 1e-14);
    }

    #[test]
    fn periodic_closure() {
        let c = BoundaryCurve::new(
            CurveShape::RadialFourier { mean: 1.0, cos: vec![0.1, 0.0, 0.05], sin: vec![0.0, 0.07] },
            [0.2, -0.1],
            false,
        )
        .unwrap();
        let a = c.point(0.0);
        let b = c.point(TAU - 1e-15);
        assert!((a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
    }

    #[test]
    fn curvature_examples() {
        let c = BoundaryCurve::circle(2.0).unwrap();
        for j in 0..64 {
            assert_abs_diff_eq!(c.curvature(TAU * j as f64 / 64.0).unwrap(), 0.5, epsilon = 1e-12);
        }
        let e = BoundaryCurve::ellipse(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(e.curvature(0.0).unwrap(), 2.0, epsilon = 1e-12);
        // κ(t) = ab / (a² sin²t + b² cos²t)^{3/2}
        for t in [0.3, 1.1, 2.0, 4.4] {
            let (s, co) = f64::sin_cos(t);
            let exact = 2.0 / (4.0 * s * s + co * co).powf(1.5);
            assert_abs_diff_eq!(e.curvature(t).unwrap(), exact, epsilon = 1e-12);
        }
        let ann = Domain::annulus(0.5, 1.0).unwrap();
        assert_abs_diff_eq!(ann.component(1).curvature(0.7).unwrap(), -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ann.min_curvature().unwrap(), -2.0, epsilon = 1e-10);
    }

    #[test]
    fn radial_fourier_circle_matches_circle() {
        let c = BoundaryCurve::new(CurveShape::RadialFourier { mean: 1.5, cos: vec![], sin: vec![] }, [0.0; 2], false)
            .unwrap();
        for j in 0..64 {
            assert_abs_diff_eq!(c.curvature(TAU * j as f64 / 64.0).unwrap(), 1.0 / 1.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn total_turning_is_two_pi() {
        let e = BoundaryCurve::ellipse(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(e.total_turning(512).unwrap(), TAU, epsilon = 1e-8);
        let r = Domain::radial_fourier(1.0, vec![0.1, 0.05], vec![0.0, 0.0, 0.03]).unwrap();
        assert_abs_diff_eq!(r.component(0).total_turning(512).unwrap(), TAU, epsilon = 1e-8);
        let ann = Domain::annulus(0.5, 1.0).unwrap();
        assert_abs_diff_eq!(ann.component(1).total_turning(256).unwrap(), -TAU, epsilon = 1e-8);
    }

    #[test]
    fn distance_examples() {
        let disk = Domain::disk(1.0).unwrap();
        let (d, foot) = disk.distance_to_boundary([0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-14);
        assert_eq!(foot.component, 0);
        let (d, foot) = disk.distance_to_boundary([0.5, 0.0]).unwrap();
        assert_abs_diff_eq!(d, 0.5, epsilon = 1e-14);
        let t = if foot.t_foot > PI { foot.t_foot - TAU } else { foot.t_foot };
        assert_abs_diff_eq!(t, 0.0, epsilon = 1e-12);

        let ann = Domain::annulus(0.5, 1.0).unwrap();
        let (d, foot) = ann.distance_to_boundary([0.7, 0.0]).unwrap();
        assert_abs_diff_eq!(d, 0.2, epsilon = 1e-14);
        assert_eq!(foot.component, 1);
    }

    #[test]
    fn distance_rejects_exterior_points() {
        let disk = Domain::disk(1.0).unwrap();
        assert!(matches!(disk.distance_to_boundary([1.0, 0.0]), Err(Error::NotInterior { .. })));
        assert!(matches!(disk.distance_to_boundary([2.0, 0.0]), Err(Error::NotInterior { .. })));
        let ann = Domain::annulus(0.5, 1.0).unwrap();
        assert!(ann.distance_to_boundary([0.1, 0.1]).is_err());
    }

    #[test]
    fn fermi_examples() {
        let disk = Domain::disk(1.0).unwrap();
        let m = disk.fermi_to_cartesian(0, 0.0, 0.3).unwrap();
        assert_abs_diff_eq!(m.position[0], 0.7, epsilon = 1e-15);
        assert!(!m.fold_warning);
        let m = disk.fermi_to_cartesian(0, PI, 0.0).unwrap();
        assert_abs_diff_eq!(m.position[0], -1.0, epsilon = 1e-15);
        let e = Domain::ellipse(2.0, 1.0).unwrap();
        let m = e.fermi_to_cartesian(0, 0.0, 0.1).unwrap();
        assert_abs_diff_eq!(m.position[0], 1.9, epsilon = 1e-15);
        assert_abs_diff_eq!(m.position[1], 0.0, epsilon = 1e-15);
        // max curvature 2 at the vertex, so folding is flagged past 0.25
        assert!(e.fermi_to_cartesian(0, 0.0, 0.3).unwrap().fold_warning);
        // the inner circle of an annulus bends away from the domain
        let ann = Domain::annulus(0.5, 1.0).unwrap();
        assert!(!ann.fermi_to_cartesian(1, 0.0, 0.4).unwrap().fold_warning);
        assert_abs_diff_eq!(ann.fermi_to_cartesian(1, 0.0, 0.2).unwrap().position[0], 0.7, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_and_invalid_curves() {
        assert!(BoundaryCurve::circle(0.0).is_err());
        assert!(BoundaryCurve::ellipse(1.0, -1.0).is_err());
        assert!(Domain::radial_fourier(0.1, vec![0.2], vec![]).is_err());
        assert!(Domain::annulus(1.5, 1.0).is_err());
    }

    #[test]
    fn annulus_normals_point_inside() {
        let ann = Domain::annulus(0.5, 1.0).unwrap();
        for (i, c) in ann.components().iter().enumerate() {
            for j in 0..32 {
                let t = TAU * j as f64 / 32.0;
                let q = c.point(t);
                let n = c.inward_normal(t);
                let p = [q[0] + 1e-6 * n[0], q[1] + 1e-6 * n[1]];
                assert!(ann.contains(p), "component {i} normal at t={t}");
            }
        }
    }
}
