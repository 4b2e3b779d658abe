//! Experiment configuration: TOML (any extension other than `.json`) or
//! JSON, with unknown keys rejected and defaults filled in.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use steklov::decay::{DEFAULT_A1_TOL, DEFAULT_DELTA, DEFAULT_FIT_RANGE, DEFAULT_WINDOW};
use steklov::fbi::{PhaseGrid, TransformKind, WeightSpec, DEFAULT_BAND};
use steklov::geometry::Domain;
use steklov::reference::ReferenceDomain;

/// A configuration problem, anchored to a line of the source when possible.
#[derive(Debug)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
            if let Some(col) = self.column {
                write!(f, ":{col}")?;
            }
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// `r(θ) = mean + Σ cos[k] cos kθ + Σ sin[k] sin kθ`, index 0 ignored.
    RadialFourier {
        mean: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Annulus {
        r0: f64,
        #[serde(default = "one")]
        outer: f64,
    },
    /// Flat cylinder over the unit circle, heights in `[-1, 1]`; closed form.
    Cylinder,
}

fn one() -> f64 {
    1.0
}

impl DomainSpec {
    /// The planar domain, or `None` for the cylinder.
    pub fn planar(&self) -> steklov::Result<Option<Domain>> {
        Ok(Some(match self {
            DomainSpec::Circle { radius } => Domain::disk(*radius)?,
            DomainSpec::Ellipse { a, b } => Domain::ellipse(*a, *b)?,
            DomainSpec::RadialFourier { mean, cos, sin } => Domain::radial_fourier(*mean, cos.clone(), sin.clone())?,
            DomainSpec::Annulus { r0, outer } => Domain::annulus(*r0, *outer)?,
            DomainSpec::Cylinder => return Ok(None),
        }))
    }

    /// Closed-form spectrum available for this domain, if any.
    pub fn reference(&self) -> Option<(ReferenceDomain, f64)> {
        match *self {
            DomainSpec::Circle { radius } => Some((ReferenceDomain::Disk { radius }, 1.0)),
            // the reference annulus has unit outer radius; σ scales as 1/R
            DomainSpec::Annulus { r0, outer } => Some((ReferenceDomain::Annulus { r0: r0 / outer }, 1.0 / outer)),
            DomainSpec::Cylinder => Some((ReferenceDomain::Cylinder, 1.0)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Nyström nodes per boundary component.
    pub n: usize,
    /// Number of lowest eigenpairs to compute.
    pub modes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { n: 256, modes: 40 }
    }
}

/// Modes used by `extend`, `fbi` and `decay-fit`. Without either key every
/// non-constant computed mode is used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Selection {
    pub indices: Option<Vec<usize>>,
    pub sigma_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtendConfig {
    /// CSV of `x, y` points; a lattice is used when absent.
    pub points: Option<PathBuf>,
    /// Lattice cells per side.
    pub lattice: usize,
    /// Minimum boundary distance of lattice points.
    pub min_distance: f64,
    /// Slack of the maximum-principle check.
    pub tolerance: f64,
}

impl Default for ExtendConfig {
    fn default() -> Self {
        ExtendConfig { points: None, lattice: 24, min_distance: 0.1, tolerance: 1e-6 }
    }
}

/// Weight family; `band` defaults to none for `thm2` and to `|p| <= 0.5`
/// for the `thm3` families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    Thm2 { delta: f64, k_order: u32, band: Option<f64> },
    Thm3Gamma { gamma: f64, band: Option<f64> },
    Thm3Sharp { band: Option<f64> },
}

impl WeightConfig {
    pub fn spec(&self) -> WeightSpec {
        match *self {
            WeightConfig::Thm2 { delta, k_order, band } => WeightSpec::thm2(delta, k_order).with_band(band),
            WeightConfig::Thm3Gamma { gamma, band } => {
                WeightSpec::thm3_gamma(gamma).with_band(band.or(Some(DEFAULT_BAND)))
            }
            WeightConfig::Thm3Sharp { band } => WeightSpec::thm3_sharp().with_band(band.or(Some(DEFAULT_BAND))),
        }
    }

    /// The same weight with its band made explicit.
    fn resolved(&self) -> Self {
        let band = self.spec().band;
        match *self {
            WeightConfig::Thm2 { delta, k_order, .. } => WeightConfig::Thm2 { delta, k_order, band },
            WeightConfig::Thm3Gamma { gamma, .. } => WeightConfig::Thm3Gamma { gamma, band },
            WeightConfig::Thm3Sharp { .. } => WeightConfig::Thm3Sharp { band },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FbiSource {
    /// Traces of the selected computed (or closed-form cylinder) modes.
    Modes,
    /// Closed-form circle modes with `h` taken from `h_sweep`.
    HSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FbiConfig {
    pub kind: TransformKind,
    pub source: FbiSource,
    pub h_sweep: Vec<f64>,
    pub grid: PhaseGrid,
    pub weights: Vec<WeightConfig>,
    pub zero_section_eps: f64,
    /// Largest tolerated fraction of squared mass within the zero section.
    pub zero_section_tol: f64,
    /// Write the full phase-space tables, not only the summary.
    pub write_tables: bool,
}

impl Default for FbiConfig {
    fn default() -> Self {
        FbiConfig {
            kind: TransformKind::Hol,
            source: FbiSource::Modes,
            h_sweep: vec![0.1, 0.05, 0.025],
            grid: PhaseGrid::default(),
            weights: vec![
                WeightConfig::Thm2 { delta: 0.5, k_order: 1, band: None },
                WeightConfig::Thm3Gamma { gamma: 0.45, band: Some(DEFAULT_BAND) },
                WeightConfig::Thm3Sharp { band: Some(DEFAULT_BAND) },
            ],
            zero_section_eps: 0.25,
            zero_section_tol: 1e-3,
            write_tables: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    /// Boundary parameters of the foot points.
    pub feet: Vec<f64>,
    /// Boundary component of the feet; by default the one carrying most of
    /// each mode's trace.
    pub component: Option<usize>,
    /// Explicit distances; otherwise `n_t` equispaced points of `fit_range`.
    pub distances: Option<Vec<f64>>,
    pub n_t: usize,
    pub fit_range: [f64; 2],
    /// Sup window half-width in arclength, in units of `h`.
    pub window: f64,
    pub delta: f64,
    pub a1_tolerance: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            feet: vec![0.0],
            component: None,
            distances: None,
            n_t: 37,
            fit_range: [DEFAULT_FIT_RANGE.0, DEFAULT_FIT_RANGE.1],
            window: DEFAULT_WINDOW,
            delta: DEFAULT_DELTA,
            a1_tolerance: DEFAULT_A1_TOL,
        }
    }
}

impl DecayConfig {
    pub fn distance_list(&self) -> Vec<f64> {
        self.distances
            .clone()
            .unwrap_or_else(|| steklov::decay::distance_list(self.fit_range[0], self.fit_range[1], self.n_t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub selection: Selection,
    #[serde(default)]
    pub extend: ExtendConfig,
    #[serde(default)]
    pub fbi: FbiConfig,
    #[serde(default)]
    pub decay: DecayConfig,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Seed for the synthetic negative control of `verify`.
    #[serde(default)]
    pub seed: u64,
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

/// First line assigning `key`, for anchoring semantic errors.
fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start().trim_start_matches('"');
            l.strip_prefix(key).is_some_and(|rest| {
                let rest = rest.trim_start_matches('"').trim_start();
                rest.starts_with('=') || rest.starts_with(':')
            })
        })
        .map(|i| i + 1)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let err = |line, column, message| ConfigError { path: path.to_path_buf(), line, column, message };
        let text = std::fs::read_to_string(path).map_err(|e| err(None, None, format!("cannot read config: {e}")))?;
        let mut cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| {
                let message = e.to_string();
                let message = message.split(" at line ").next().unwrap_or_default().to_string();
                err(Some(e.line()), Some(e.column()), message)
            })?
        } else {
            toml::from_str(&text).map_err(|e| {
                let (line, col) = e.span().map(|s| line_col(&text, s.start)).unzip();
                err(line, col, e.message().to_string())
            })?
        };
        if let Err((key, message)) = cfg.validate() {
            return Err(err(key_line(&text, key), None, message));
        }
        for w in &mut cfg.fbi.weights {
            *w = w.resolved();
        }
        // resolve relative paths against the config's directory
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = &cfg.extend.points {
            if p.is_relative() {
                cfg.extend.points = Some(base.join(p));
            }
        }
        if let Some(p) = &cfg.output {
            if p.is_relative() {
                cfg.output = Some(base.join(p));
            }
        }
        Ok(cfg)
    }

    /// Semantic checks; the error names the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if let Err(e) = self.domain.planar() {
            return Err(("kind", format!("invalid domain: {e}")));
        }
        let s = &self.solver;
        if s.n < 32 || !s.n.is_multiple_of(2) {
            return Err(("n", format!("solver.n must be even and at least 32, got {}", s.n)));
        }
        let components = match self.domain {
            DomainSpec::Annulus { .. } | DomainSpec::Cylinder => 2,
            _ => 1,
        };
        if s.modes == 0 || s.modes > components * s.n / 2 {
            return Err(("modes", format!("solver.modes must lie in 1..={}, got {}", components * s.n / 2, s.modes)));
        }
        if let Some([lo, hi]) = self.selection.sigma_range {
            if !(lo <= hi) {
                return Err(("sigma_range", format!("empty sigma_range [{lo}, {hi}]")));
            }
        }
        if self.selection.indices.is_some() && self.selection.sigma_range.is_some() {
            return Err(("indices", "give either selection.indices or selection.sigma_range, not both".into()));
        }
        if let Some(i) = self.selection.indices.iter().flatten().find(|&&i| i >= s.modes) {
            return Err(("indices", format!("mode index {i} is not among the {} computed modes", s.modes)));
        }
        let e = &self.extend;
        if e.lattice < 2 || !(e.min_distance > 0.0) || !(e.tolerance >= 0.0) {
            return Err(("lattice", "extend needs lattice >= 2, min_distance > 0 and tolerance >= 0".into()));
        }
        let f = &self.fbi;
        if f.h_sweep.iter().any(|&h| !(h > 0.0 && h <= 1.0)) {
            return Err(("h_sweep", "every h in fbi.h_sweep must lie in (0, 1]".into()));
        }
        if f.source == FbiSource::HSweep {
            let DomainSpec::Circle { radius } = self.domain else {
                return Err(("source", "fbi.source = \"h_sweep\" needs a circle domain".into()));
            };
            if let Some(h) = f.h_sweep.iter().find(|&&h| ((radius / h).round() - radius / h).abs() > 1e-9) {
                return Err(("h_sweep", format!("R/h must be an integer, got R/h = {}", radius / h)));
            }
        }
        if f.grid.n_x == 0 || f.grid.n_xi < 2 || !(f.grid.xi_max > f.grid.xi_min) {
            return Err(("grid", format!("bad fbi.grid {:?}", f.grid)));
        }
        for w in &f.weights {
            if let Err(e) = w.spec().validate() {
                return Err(("weights", e.to_string()));
            }
        }
        if !(f.zero_section_eps > 0.0) || !(f.zero_section_tol > 0.0) {
            return Err(("zero_section_eps", "zero-section parameters must be positive".into()));
        }
        let d = &self.decay;
        if d.feet.is_empty() {
            return Err(("feet", "decay.feet must not be empty".into()));
        }
        if d.component.is_some_and(|c| c >= components) {
            return Err(("component", format!("the domain has {components} boundary component(s)")));
        }
        if !(d.fit_range[0] < d.fit_range[1]) || d.fit_range[0] < 0.0 {
            return Err(("fit_range", format!("bad fit_range {:?}", d.fit_range)));
        }
        if d.distance_list().iter().any(|&t| !(t > 0.0)) {
            return Err(("distances", "decay distances must be positive".into()));
        }
        if !(d.window >= 0.0) || !(d.delta >= 0.0) || !(d.a1_tolerance > 0.0) {
            return Err(("window", "decay window and delta must be non-negative, a1_tolerance positive".into()));
        }
        Ok(())
    }
}
