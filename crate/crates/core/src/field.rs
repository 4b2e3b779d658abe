use num_complex::Complex64;

use crate::error::Result;

/// A Steklov eigenfunction that can be evaluated inside its domain and
/// probed along inward normal rays.
///
/// Points are given in the field's own chart: Cartesian coordinates for
/// planar domains, `(angle, height)` for the flat cylinder.
pub trait SteklovField: Sync {
    /// Semiclassical parameter `1/σ`.
    fn h(&self) -> f64;

    fn eval(&self, p: [f64; 2]) -> Result<Complex64>;

    /// Point at normal distance `s` from boundary parameter `t` of
    /// `component`.
    fn fermi_point(&self, component: usize, t: f64, s: f64) -> Result<[f64; 2]>;

    /// `|q'(t)|`, used to convert arclength windows into parameter windows.
    fn boundary_speed(&self, component: usize, t: f64) -> f64;

    /// Second fundamental form of the boundary at the foot point.
    fn boundary_curvature(&self, component: usize, t: f64) -> Result<f64>;

    /// Supremum of the boundary trace modulus.
    fn boundary_sup(&self) -> f64;

    /// Smallest boundary distance at which [`SteklovField::eval`] is accurate.
    fn min_reliable_distance(&self) -> f64 {
        0.0
    }
}
