//! Nyström discretization of the Laplace layer potentials on a domain
//! boundary and the resulting Dirichlet-to-Neumann (Steklov) eigenproblem.
//!
//! With `Φ(x, y) = -(1/2π) log|x - y|` and the outward normal `ν`, Green's
//! identity for a harmonic `u` on a smooth boundary reads
//!
//! ```text
//! (½ I + K) u = S ∂_ν u,   S f(x) = ∫ Φ(x,y) f(y) ds_y,   K f(x) = ∫ ∂_{ν_y} Φ(x,y) f(y) ds_y
//! ```
//!
//! so the DtN map is `S⁻¹(½ I + K)` and Steklov pairs solve
//! `(½ I + K) φ = σ S φ`. `S` uses the periodic log-splitting quadrature of
//! Kress; `K` has a smooth kernel whose diagonal limit is `-κ/4π` per unit
//! arclength. Both converge geometrically for analytic boundaries.

use std::f64::consts::{PI, TAU};
use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier;
use crate::geometry::Domain;

/// Matrices whose condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative tolerance for grouping eigenvalues into multiplets.
pub const MULTIPLICITY_TOL: f64 = 1e-6;

/// One quadrature node on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub component: usize,
    pub t: f64,
    pub point: [f64; 2],
    pub speed: f64,
    pub outward_normal: [f64; 2],
    pub curvature: f64,
    /// Trapezoid arclength weight `|q'(t)| 2π/N`.
    pub weight: f64,
}

/// `N` equispaced parameter nodes on each boundary component.
#[derive(Debug, Clone)]
pub struct NystromGrid {
    domain: Domain,
    per_component: usize,
    nodes: Vec<Node>,
}

impl NystromGrid {
    pub fn new(domain: &Domain, per_component: usize) -> Result<Self> {
        if per_component < 32 || !per_component.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("Nyström grid needs an even N >= 32, got {per_component}")));
        }
        let mut nodes = Vec::with_capacity(per_component * domain.components().len());
        for (c, curve) in domain.components().iter().enumerate() {
            for t in fourier::grid(per_component) {
                let speed = curve.speed(t);
                nodes.push(Node {
                    component: c,
                    t,
                    point: curve.point(t),
                    speed,
                    outward_normal: curve.outward_normal(t),
                    curvature: curve.curvature(t)?,
                    weight: speed * TAU / per_component as f64,
                });
            }
        }
        Ok(NystromGrid { domain: domain.clone(), per_component, nodes })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn per_component(&self) -> usize {
        self.per_component
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn component_range(&self, c: usize) -> Range<usize> {
        c * self.per_component..(c + 1) * self.per_component
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight).collect()
    }

    /// `Σ ω_j f_j conj(g_j)`.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        self.nodes.iter().zip(f.iter().zip(g)).map(|(n, (a, b))| a * b.conj() * n.weight).sum()
    }

    pub fn l2_norm(&self, f: &[Complex64]) -> f64 {
        self.inner(f, f).re.sqrt()
    }
}

/// Kress weights `R_d` for `∫ log(4 sin²((t-τ)/2)) f(τ) dτ` at node offset `d`.
fn kress_weights(n_nodes: usize) -> Vec<f64> {
    let n = n_nodes / 2;
    let nf = n as f64;
    (0..n_nodes)
        .map(|d| {
            let s = PI * d as f64 / nf;
            let mut acc = 0.0;
            for m in 1..n {
                acc += (m as f64 * s).cos() / m as f64;
            }
            -TAU / nf * acc - PI / (nf * nf) * (nf * s).cos()
        })
        .collect()
}

/// Dense single- and double-layer matrices on a [`NystromGrid`].
#[derive(Debug, Clone)]
pub struct LayerOperators {
    grid: Arc<NystromGrid>,
    single: DMatrix<f64>,
    double: DMatrix<f64>,
}

pub fn assemble_layers(domain: &Domain, n: usize) -> Result<LayerOperators> {
    let grid = NystromGrid::new(domain, n)?;
    let nodes = grid.nodes();
    let total = nodes.len();

    let diam = domain.diameter();
    let ncomp = domain.components().len();
    for a in 0..ncomp {
        for b in a + 1..ncomp {
            let ra = grid.component_range(a);
            let rb = grid.component_range(b);
            let close = nodes[ra].iter().any(|p| {
                nodes[rb.clone()]
                    .iter()
                    .any(|q| (p.point[0] - q.point[0]).hypot(p.point[1] - q.point[1]) <= 1e-12 * diam)
            });
            if close {
                return Err(Error::CoincidentNodes(a, b));
            }
        }
    }

    let kress = kress_weights(n);
    let h = TAU / n as f64;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let x = &nodes[i];
            let mut srow = vec![0.0; total];
            let mut krow = vec![0.0; total];
            for (j, y) in nodes.iter().enumerate() {
                let dx = y.point[0] - x.point[0];
                let dy = y.point[1] - x.point[1];
                let r2 = dx * dx + dy * dy;
                if i == j {
                    krow[j] = -x.curvature / (2.0 * TAU) * y.weight;
                } else {
                    let dot = dx * y.outward_normal[0] + dy * y.outward_normal[1];
                    krow[j] = -dot / (TAU * r2) * y.weight;
                }
                srow[j] = if x.component == y.component {
                    let il = i % n;
                    let jl = j % n;
                    let d = (il + n - jl) % n;
                    let m1 = -y.speed / (2.0 * TAU);
                    let m2 = if i == j {
                        m1 * (y.speed * y.speed).ln()
                    } else {
                        let s = (0.5 * (x.t - y.t)).sin();
                        m1 * (r2 / (4.0 * s * s)).ln()
                    };
                    kress[d] * m1 + h * m2
                } else {
                    -r2.ln() / (2.0 * TAU) * y.weight
                };
            }
            (srow, krow)
        })
        .collect();

    let mut single = DMatrix::zeros(total, total);
    let mut double = DMatrix::zeros(total, total);
    for (i, (s, k)) in rows.into_iter().enumerate() {
        for j in 0..total {
            single[(i, j)] = s[j];
            double[(i, j)] = k[j];
        }
    }
    Ok(LayerOperators { grid: Arc::new(grid), single, double })
}

impl LayerOperators {
    pub fn grid(&self) -> &Arc<NystromGrid> {
        &self.grid
    }

    pub fn single_layer(&self) -> &DMatrix<f64> {
        &self.single
    }

    pub fn double_layer(&self) -> &DMatrix<f64> {
        &self.double
    }

    /// `W^{1/2} S W^{-1/2}` with the arclength weights `W`; symmetric up to
    /// rounding.
    pub fn single_layer_symmetrized(&self) -> DMatrix<f64> {
        let w: Vec<f64> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        let mut s = self.single.clone();
        for i in 0..s.nrows() {
            for j in 0..s.ncols() {
                s[(i, j)] *= w[i] / w[j];
            }
        }
        s
    }

    /// Builds the discrete DtN matrix.
    ///
    /// The 2-D single layer is singular when the boundary has logarithmic
    /// capacity 1 (the unit circle, for instance). Rescaling the domain to
    /// unit diameter avoids that; the rescaled single layer is
    /// `S + (ln diam / 2π) 1 ωᵀ` up to a scalar factor, and the rank-one term
    /// annihilates every eigenfunction with `σ > 0` (they have zero mean), so
    /// the spectrum is unchanged.
    pub fn dtn(&self) -> Result<DtnOperator> {
        let n = self.single.nrows();
        let beta = self.grid.domain().diameter().ln() / TAU;
        let weights = self.grid.weights();
        let mut smod = self.single.clone();
        for i in 0..n {
            for j in 0..n {
                smod[(i, j)] += beta * weights[j];
            }
        }
        let sv = smod.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition < MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        let mut rhs = self.double.clone();
        for i in 0..n {
            rhs[(i, i)] += 0.5;
        }
        let lu = smod.clone().lu();
        let matrix = lu.solve(&rhs).ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
        Ok(DtnOperator { grid: self.grid.clone(), matrix, single_mod: smod, rhs, condition })
    }
}

/// Discrete Dirichlet-to-Neumann map on a Nyström grid.
#[derive(Debug, Clone)]
pub struct DtnOperator {
    grid: Arc<NystromGrid>,
    matrix: DMatrix<f64>,
    single_mod: DMatrix<f64>,
    rhs: DMatrix<f64>,
    condition: f64,
}

impl DtnOperator {
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn grid(&self) -> &Arc<NystromGrid> {
        &self.grid
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.matrix.ncols() {
            return Err(Error::InvalidParameter(format!(
                "boundary vector has {} entries, grid has {}",
                f.len(),
                self.matrix.ncols()
            )));
        }
        Ok((&self.matrix * DVector::from_column_slice(f)).as_slice().to_vec())
    }

    pub fn apply_complex(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let re: Vec<f64> = f.iter().map(|z| z.re).collect();
        let im: Vec<f64> = f.iter().map(|z| z.im).collect();
        let a = self.apply(&re)?;
        let b = self.apply(&im)?;
        Ok(a.into_iter().zip(b).map(|(x, y)| Complex64::new(x, y)).collect())
    }

    /// `‖(½+K)φ − σ S φ‖_ω / (max(σ, 1) ‖S φ‖_ω)` for a real trace, using
    /// the unsymmetrized operators.
    fn residual(&self, sigma: f64, phi: &DVector<f64>) -> f64 {
        let lhs = &self.rhs * phi;
        let s_phi = &self.single_mod * phi;
        let w = self.grid.weights();
        let norm = |v: &DVector<f64>| v.iter().zip(&w).map(|(x, w)| x * x * w).sum::<f64>().sqrt();
        let scale = (norm(&s_phi) * sigma.max(1.0)).max(f64::MIN_POSITIVE);
        let rhs = s_phi * sigma;
        norm(&(lhs - rhs)) / scale
    }
}

/// Applies the discrete DtN map to a boundary vector.
pub fn dtn_apply(ops: &LayerOperators, f: &[f64]) -> Result<Vec<f64>> {
    ops.dtn()?.apply(f)
}

/// A computed Steklov eigenpair.
#[derive(Debug, Clone)]
pub struct SteklovMode {
    /// Position in the ascending spectrum.
    pub index: usize,
    pub sigma: f64,
    /// Boundary trace on the Nyström grid, unit `L²(∂Ω)` norm.
    pub trace: Vec<Complex64>,
    pub residual: f64,
    /// Whether the trace's dominant wavenumber is at most `N/4`.
    pub resolved: bool,
    grid: Arc<NystromGrid>,
}

impl SteklovMode {
    /// `h = 1/σ`, undefined for the constant mode.
    pub fn h(&self) -> Option<f64> {
        (self.sigma > 0.0).then(|| 1.0 / self.sigma)
    }

    pub fn grid(&self) -> &Arc<NystromGrid> {
        &self.grid
    }

    pub fn l2_norm(&self) -> f64 {
        self.grid.l2_norm(&self.trace)
    }

    /// Largest dominant wavenumber across boundary components.
    pub fn wavenumber(&self) -> usize {
        (0..self.grid.domain().components().len())
            .map(|c| fourier::dominant_wavenumber(&self.trace[self.grid.component_range(c)]))
            .max()
            .unwrap_or(0)
    }

    /// Normalized `Σ c_i φ_i` over (near-)degenerate modes, with `σ` the
    /// weighted mean.
    pub fn combine(modes: &[&SteklovMode], coefs: &[Complex64]) -> Result<SteklovMode> {
        let first = modes.first().ok_or_else(|| Error::InvalidParameter("no modes to combine".into()))?;
        if modes.len() != coefs.len() {
            return Err(Error::InvalidParameter("one coefficient per mode is required".into()));
        }
        let spread = modes.iter().map(|m| (m.sigma - first.sigma).abs()).fold(0.0, f64::max);
        if spread > MULTIPLICITY_TOL * first.sigma.max(1.0) {
            return Err(Error::InvalidParameter(format!("modes are not degenerate (eigenvalue spread {spread:e})")));
        }
        let mut trace = vec![Complex64::new(0.0, 0.0); first.trace.len()];
        for (m, c) in modes.iter().zip(coefs) {
            if !Arc::ptr_eq(&m.grid, &first.grid) {
                return Err(Error::InvalidParameter("modes live on different grids".into()));
            }
            for (t, v) in trace.iter_mut().zip(&m.trace) {
                *t += c * v;
            }
        }
        let norm = first.grid.l2_norm(&trace);
        if norm == 0.0 {
            return Err(Error::InvalidParameter("combination vanishes".into()));
        }
        trace.iter_mut().for_each(|z| *z /= norm);
        let wsum: f64 = coefs.iter().map(|c| c.norm_sqr()).sum();
        let sigma = modes.iter().zip(coefs).map(|(m, c)| m.sigma * c.norm_sqr()).sum::<f64>() / wsum;
        Ok(SteklovMode {
            index: first.index,
            sigma,
            trace,
            residual: modes.iter().map(|m| m.residual).fold(0.0, f64::max),
            resolved: modes.iter().all(|m| m.resolved),
            grid: first.grid.clone(),
        })
    }

    /// `(φ_a + i φ_b)/√2` for a degenerate pair: a travelling wave whose
    /// modulus is rotation invariant on the disk and annulus.
    pub fn travelling(a: &SteklovMode, b: &SteklovMode) -> Result<SteklovMode> {
        Self::combine(&[a, b], &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])
    }

    /// Weighted projection of `target` onto the span of `modes`.
    pub fn project(modes: &[&SteklovMode], target: &[Complex64]) -> Result<SteklovMode> {
        let coefs: Vec<Complex64> = modes.iter().map(|m| m.grid.inner(target, &m.trace)).collect();
        Self::combine(modes, &coefs)
    }
}

/// Lowest `n_modes` Steklov eigenpairs, ascending in `σ`.
///
/// The discrete DtN matrix `D` is self-adjoint in the arclength-weighted
/// inner product up to discretization error; its weighted symmetrization
/// `W^{1/2} D W^{-1/2}` is diagonalized. The antisymmetric part is dropped,
/// which perturbs eigenvalues only at second order.
pub fn steklov_solve(ops: &LayerOperators, n_modes: usize) -> Result<Vec<SteklovMode>> {
    let dtn = ops.dtn()?;
    solve_with(&dtn, n_modes)
}

pub fn solve_with(dtn: &DtnOperator, n_modes: usize) -> Result<Vec<SteklovMode>> {
    let grid = dtn.grid.clone();
    let total = grid.len();
    if n_modes == 0 || n_modes > total / 2 {
        return Err(Error::InvalidParameter(format!("n_modes must be in 1..={}, got {n_modes}", total / 2)));
    }
    let sq: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let mut m = dtn.matrix.clone();
    for i in 0..total {
        for j in 0..total {
            m[(i, j)] *= sq[i] / sq[j];
        }
    }
    let sym = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, 1e-15, 10_000)
        .ok_or_else(|| Error::EigenSolver("symmetric QR iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let top = eig.eigenvalues[order[n_modes - 1]].abs().max(1.0);
    let neg_tol = 1e-8 * top;
    let limit = grid.per_component() / 4;
    let mut modes = Vec::with_capacity(n_modes);
    for (index, &col) in order.iter().take(n_modes).enumerate() {
        let mut sigma = eig.eigenvalues[col];
        if sigma < -neg_tol {
            return Err(Error::NegativeEigenvalue { value: sigma });
        }
        if sigma < 0.0 {
            sigma = 0.0;
        }
        let v = eig.eigenvectors.column(col);
        let mut phi = DVector::from_iterator(total, v.iter().zip(&sq).map(|(x, s)| x / s));
        // deterministic sign: largest entry positive
        let imax = phi.iamax();
        if phi[imax] < 0.0 {
            phi.neg_mut();
        }
        let trace: Vec<Complex64> = phi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let norm = grid.l2_norm(&trace);
        let trace: Vec<Complex64> = trace.into_iter().map(|z| z / norm).collect();
        let phi = phi / norm;
        let residual = dtn.residual(sigma, &phi);
        let mut mode = SteklovMode { index, sigma, trace, residual, resolved: true, grid: grid.clone() };
        mode.resolved = mode.wavenumber() <= limit;
        modes.push(mode);
    }
    Ok(modes)
}

/// Multiplicity estimate for each eigenvalue in an ascending list.
pub fn multiplicities(sigmas: &[f64]) -> Vec<usize> {
    let mut out = vec![1; sigmas.len()];
    let mut start = 0;
    for i in 1..=sigmas.len() {
        let split =
            i == sigmas.len() || (sigmas[i] - sigmas[start]).abs() > MULTIPLICITY_TOL * sigmas[start].abs().max(1.0);
        if split {
            for o in &mut out[start..i] {
                *o = i - start;
            }
            start = i;
        }
    }
    out
}
