//! The subcommand pipelines. Each stage writes its own CSV and JSON files
//! and returns a summary that `verify` aggregates.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use steklov::decay::{
    fit_decay, predicted_constants, sample_normal_ray, verify_theorem1, DecayProfile, PredictedConstants,
    Theorem1Report,
};
use steklov::dtn::{assemble_layers, multiplicities, solve_with, SteklovMode, MULTIPLICITY_TOL};
use steklov::extension::{interior_lattice, max_principle_check, ExtensionField, MaxPrincipleReport};
use steklov::fbi::{
    fbi_geo, fbi_hol, fbi_of_computed_mode, weighted_norm, zero_section_mass, NormKind, PhaseSpaceTable, TransformKind,
};
use steklov::geometry::Domain;
use steklov::reference::{
    cylinder_mode, disk_mode, reference_spectrum, CylinderModeField, Family, Parity, ReferenceDomain,
};
use steklov::SteklovField;

use crate::config::{DomainSpec, ExperimentConfig, FbiSource, WeightConfig};
use crate::output::{num, OutputDir};

#[derive(Debug)]
pub enum CliError {
    /// The configuration is valid but selects nothing usable.
    Selection(String),
    Numerical(steklov::Error),
    Io(std::io::Error),
}

impl From<steklov::Error> for CliError {
    fn from(e: steklov::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub enum Source {
    Computed(SteklovMode),
    Cylinder(CylinderModeField),
}

pub struct Mode {
    pub index: usize,
    pub sigma: f64,
    pub multiplicity: usize,
    pub residual: f64,
    pub source: Source,
}

impl Mode {
    fn h(&self) -> Result<f64> {
        if self.sigma > 0.0 {
            Ok(1.0 / self.sigma)
        } else {
            Err(CliError::Selection(format!("mode {} is constant and has no semiclassical parameter", self.index)))
        }
    }

    fn field(&self) -> Result<Box<dyn SteklovField>> {
        self.h()?;
        Ok(match &self.source {
            Source::Computed(m) => Box::new(ExtensionField::new(m)?),
            Source::Cylinder(c) => Box::new(*c),
        })
    }

    /// Component carrying the largest share of the trace.
    fn dominant_component(&self) -> usize {
        let Source::Computed(m) = &self.source else { return 0 };
        let grid = m.grid();
        let mass = |c: usize| -> f64 {
            let r = grid.component_range(c);
            grid.nodes()[r.clone()].iter().zip(&m.trace[r]).map(|(n, z)| n.weight * z.norm_sqr()).sum()
        };
        (0..grid.domain().components().len()).max_by(|&a, &b| mass(a).total_cmp(&mass(b))).unwrap_or(0)
    }

    fn fbi_table(&self, cfg: &ExperimentConfig, component: usize) -> Result<PhaseSpaceTable> {
        let fbi = &cfg.fbi;
        match &self.source {
            Source::Computed(m) => Ok(fbi_of_computed_mode(m, component, fbi.kind, &fbi.grid)?),
            Source::Cylinder(c) => {
                let n = 2 * cfg.solver.n;
                let samples: Vec<Complex64> =
                    steklov::fourier::grid(n).map(|x| cylinder_mode(c.k, c.parity, x, 1.0)).collect();
                transform(fbi.kind, &samples, TAU, self.h()?, &fbi.grid)
            }
        }
    }
}

fn transform(
    kind: TransformKind,
    samples: &[Complex64],
    period: f64,
    h: f64,
    grid: &steklov::fbi::PhaseGrid,
) -> Result<PhaseSpaceTable> {
    Ok(match kind {
        TransformKind::Geo => fbi_geo(samples, period, h, grid)?,
        TransformKind::Hol => fbi_hol(samples, period, h, grid)?,
    })
}

/// Solved eigenpairs plus what the later stages need.
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub domain: Option<Domain>,
    pub modes: Vec<Mode>,
    pub condition: Option<f64>,
}

impl Experiment {
    pub fn solve(cfg: ExperimentConfig) -> Result<Self> {
        let domain = cfg.domain.planar()?;
        let (modes, condition) = match &domain {
            Some(d) => {
                let ops = assemble_layers(d, cfg.solver.n)?;
                let dtn = ops.dtn()?;
                let computed = solve_with(&dtn, cfg.solver.modes)?;
                let sigmas: Vec<f64> = computed.iter().map(|m| m.sigma).collect();
                let mult = multiplicities(&sigmas);
                let modes = computed
                    .into_iter()
                    .zip(mult)
                    .map(|(m, multiplicity)| Mode {
                        index: m.index,
                        sigma: m.sigma,
                        multiplicity,
                        residual: m.residual,
                        source: Source::Computed(m),
                    })
                    .collect();
                (modes, Some(dtn.condition()))
            }
            None => (cylinder_modes(cfg.solver.modes)?, None),
        };
        Ok(Experiment { cfg, domain, modes, condition })
    }

    pub fn selected(&self) -> Result<Vec<&Mode>> {
        let sel = &self.cfg.selection;
        let out: Vec<&Mode> = match (&sel.indices, sel.sigma_range) {
            (Some(ix), _) => ix.iter().map(|&i| &self.modes[i]).collect(),
            (None, Some([lo, hi])) => self.modes.iter().filter(|m| m.sigma >= lo && m.sigma <= hi).collect(),
            (None, None) => self.modes.iter().filter(|m| m.sigma > MULTIPLICITY_TOL).collect(),
        };
        if out.is_empty() {
            return Err(CliError::Selection("the mode selection is empty".into()));
        }
        Ok(out)
    }

    fn constants(&self) -> Result<PredictedConstants> {
        Ok(match &self.domain {
            Some(d) => predicted_constants(d)?,
            None => PredictedConstants::flat(),
        })
    }
}

fn cylinder_modes(count: usize) -> Result<Vec<Mode>> {
    let entries = reference_spectrum(&ReferenceDomain::Cylinder, count)?;
    let mut modes = Vec::with_capacity(count);
    for e in entries {
        let parity = if e.family == Family::CylinderEven { Parity::Even } else { Parity::Odd };
        for _ in 0..e.multiplicity {
            modes.push(Mode {
                index: modes.len(),
                sigma: e.sigma,
                multiplicity: e.multiplicity,
                residual: 0.0,
                source: Source::Cylinder(CylinderModeField { k: e.index, parity }),
            });
        }
    }
    modes.truncate(count);
    Ok(modes)
}

// ---------------------------------------------------------------- spectrum

#[derive(Debug, Serialize)]
pub struct SpectrumSummary {
    pub modes: usize,
    pub condition: Option<f64>,
    pub max_residual: f64,
    /// Largest deviation from the closed-form spectrum, when one exists.
    pub max_reference_error: Option<f64>,
    pub unresolved: Vec<usize>,
}

pub fn spectrum(exp: &Experiment, out: &OutputDir) -> Result<SpectrumSummary> {
    let mut csv = out.csv("spectrum.csv", &["index", "sigma", "multiplicity_estimate", "residual"])?;
    for m in &exp.modes {
        csv.row([m.index.to_string(), num(m.sigma), m.multiplicity.to_string(), num(m.residual)])?;
    }
    csv.finish()?;
    let max_reference_error = match exp.cfg.domain.reference() {
        Some((reference, scale)) => {
            let exact = steklov::reference::with_multiplicity(&reference_spectrum(&reference, exp.modes.len())?);
            Some(exp.modes.iter().zip(exact).map(|(m, s)| (m.sigma - scale * s).abs()).fold(0.0, f64::max))
        }
        None => None,
    };
    let summary = SpectrumSummary {
        modes: exp.modes.len(),
        condition: exp.condition,
        max_residual: exp.modes.iter().map(|m| m.residual).fold(0.0, f64::max),
        max_reference_error,
        unresolved: exp
            .modes
            .iter()
            .filter(|m| matches!(&m.source, Source::Computed(c) if !c.resolved))
            .map(|m| m.index)
            .collect(),
    };
    out.json("spectrum.json", &summary)?;
    Ok(summary)
}

// ------------------------------------------------------------------ extend

#[derive(Debug, Serialize)]
pub struct ExtendEntry {
    pub index: usize,
    pub sigma: f64,
    pub points: usize,
    pub max_principle: MaxPrincipleReport,
}

#[derive(Debug, Serialize)]
pub struct ExtendSummary {
    pub modes: Vec<ExtendEntry>,
    pub passed: bool,
}

fn read_points(path: &Path) -> Result<Vec<[f64; 2]>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: Option<Vec<f64>> = record.iter().map(|f| f.parse().ok()).collect();
        match parsed.as_deref() {
            Some([x, y]) => points.push([*x, *y]),
            // a header row
            None if i == 0 => {}
            _ => return Err(CliError::Selection(format!("{}: line {} is not an `x, y` pair", path.display(), i + 1))),
        }
    }
    Ok(points)
}

fn lattice(exp: &Experiment, field: &dyn SteklovField) -> Vec<[f64; 2]> {
    let e = &exp.cfg.extend;
    let d = e.min_distance.max(1.01 * field.min_reliable_distance());
    match &exp.domain {
        Some(domain) => interior_lattice(domain, e.lattice, d),
        None => {
            let n = e.lattice;
            (0..n)
                .flat_map(|i| {
                    (0..n).map(move |j| {
                        [TAU * (i as f64 + 0.5) / n as f64, -1.0 + d + (2.0 - 2.0 * d) * j as f64 / (n - 1) as f64]
                    })
                })
                .collect()
        }
    }
}

pub fn extend(exp: &Experiment, out: &OutputDir) -> Result<ExtendSummary> {
    let user_points = exp.cfg.extend.points.as_deref().map(read_points).transpose()?;
    let mut entries = Vec::new();
    for mode in exp.selected()? {
        let field = mode.field()?;
        let points = match &user_points {
            Some(p) => p.clone(),
            None => lattice(exp, field.as_ref()),
        };
        let values = points.par_iter().map(|&p| field.eval(p)).collect::<steklov::Result<Vec<_>>>()?;
        let mut csv = out.csv(&format!("extend_mode{}.csv", mode.index), &["x", "y", "re", "im", "abs"])?;
        for (p, u) in points.iter().zip(&values) {
            csv.row([num(p[0]), num(p[1]), num(u.re), num(u.im), num(u.norm())])?;
        }
        csv.finish()?;
        let report = max_principle_check(field.as_ref(), &points, exp.cfg.extend.tolerance)?;
        entries.push(ExtendEntry { index: mode.index, sigma: mode.sigma, points: points.len(), max_principle: report });
    }
    let summary = ExtendSummary { passed: entries.iter().all(|e| e.max_principle.passed), modes: entries };
    out.json("extend.json", &summary)?;
    Ok(summary)
}

// --------------------------------------------------------------------- fbi

#[derive(Debug, Serialize)]
pub struct WeightedNorms {
    pub weight: WeightConfig,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Serialize)]
pub struct FbiEntry {
    /// Mode index, or `None` for an `h`-sweep table.
    pub index: Option<usize>,
    pub h: f64,
    pub component: usize,
    pub l2: f64,
    pub linf: f64,
    /// Share of the squared `L²` mass with `|α_ξ| <= zero_section_eps`.
    pub zero_section_fraction: f64,
    pub weighted: Vec<WeightedNorms>,
}

#[derive(Debug, Serialize)]
pub struct SweepSlope {
    pub weight: WeightConfig,
    /// Least-squares slope of `log ‖·‖` against `log h`.
    pub l2_slope: f64,
    pub linf_slope: f64,
}

#[derive(Debug, Serialize)]
pub struct FbiSummary {
    pub kind: TransformKind,
    pub tables: Vec<FbiEntry>,
    pub sweep_slopes: Vec<SweepSlope>,
    pub passed: bool,
}

fn summarize(
    cfg: &ExperimentConfig,
    table: &PhaseSpaceTable,
    index: Option<usize>,
    component: usize,
) -> Result<FbiEntry> {
    let l2 = table.l2_norm();
    let weighted = cfg
        .fbi
        .weights
        .iter()
        .map(|w| {
            let spec = w.spec();
            Ok(WeightedNorms {
                weight: *w,
                l2: weighted_norm(table, &spec, NormKind::L2)?,
                linf: weighted_norm(table, &spec, NormKind::Linf)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FbiEntry {
        index,
        h: table.h,
        component,
        l2,
        linf: table.linf_norm(),
        zero_section_fraction: (zero_section_mass(table, cfg.fbi.zero_section_eps) / l2).powi(2),
        weighted,
    })
}

fn write_table(out: &OutputDir, name: &str, table: &PhaseSpaceTable) -> Result<()> {
    let mut csv = out.csv(name, &["alpha_x", "alpha_xi", "re", "im", "abs"])?;
    for (x, xi, v) in table.rows() {
        csv.row([num(x), num(xi), num(v.re), num(v.im), num(v.norm())])?;
    }
    Ok(csv.finish()?)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn fbi(exp: &Experiment, out: &OutputDir) -> Result<FbiSummary> {
    let cfg = &exp.cfg;
    let mut tables = Vec::new();
    match cfg.fbi.source {
        FbiSource::Modes => {
            for mode in exp.selected()? {
                let component = mode.dominant_component();
                let table = mode.fbi_table(cfg, component)?;
                if cfg.fbi.write_tables {
                    write_table(out, &format!("fbi_mode{}.csv", mode.index), &table)?;
                }
                tables.push(summarize(cfg, &table, Some(mode.index), component)?);
            }
        }
        FbiSource::HSweep => {
            let DomainSpec::Circle { radius } = cfg.domain else {
                return Err(CliError::Selection("an h sweep needs a circle domain".into()));
            };
            let n = 2 * cfg.solver.n;
            for (i, &h) in cfg.fbi.h_sweep.iter().enumerate() {
                let k = (radius / h).round() as usize;
                let samples: Vec<Complex64> =
                    steklov::fourier::grid(n).map(|t| disk_mode(radius, k, radius, t)).collect();
                let table = transform(cfg.fbi.kind, &samples, TAU * radius, h, &cfg.fbi.grid)?;
                if cfg.fbi.write_tables {
                    write_table(out, &format!("fbi_h{i}.csv"), &table)?;
                }
                tables.push(summarize(cfg, &table, None, 0)?);
            }
        }
    }
    let sweep_slopes = if cfg.fbi.source == FbiSource::HSweep && tables.len() >= 2 {
        let logh: Vec<f64> = tables.iter().map(|t| t.h.ln()).collect();
        (0..cfg.fbi.weights.len())
            .map(|w| {
                let l2: Vec<f64> = tables.iter().map(|t| t.weighted[w].l2.ln()).collect();
                let linf: Vec<f64> = tables.iter().map(|t| t.weighted[w].linf.ln()).collect();
                SweepSlope { weight: cfg.fbi.weights[w], l2_slope: slope(&logh, &l2), linf_slope: slope(&logh, &linf) }
            })
            .collect()
    } else {
        vec![]
    };
    let passed = tables.iter().all(|t| {
        t.zero_section_fraction <= cfg.fbi.zero_section_tol
            && t.weighted.iter().all(|w| w.l2.is_finite() && w.linf.is_finite())
    });
    let summary = FbiSummary { kind: cfg.fbi.kind, tables, sweep_slopes, passed };
    out.json("fbi.json", &summary)?;
    Ok(summary)
}

// ------------------------------------------------------------------- decay

#[derive(Debug, Serialize)]
pub struct DecayEntry {
    pub index: usize,
    pub sigma: f64,
    pub component: usize,
    pub report: Theorem1Report,
}

#[derive(Debug, Serialize)]
pub struct DecaySummary {
    pub constants: PredictedConstants,
    pub modes: Vec<DecayEntry>,
    pub passed: bool,
}

pub fn decay(exp: &Experiment, out: &OutputDir) -> Result<DecaySummary> {
    let cfg = &exp.cfg.decay;
    let constants = exp.constants()?;
    let distances = cfg.distance_list();
    let range = (cfg.fit_range[0], cfg.fit_range[1]);
    let mut fits = out.csv(
        "decay.csv",
        &["mode", "component", "t_foot", "a0", "a1", "a2", "residual", "predicted_a2_lower_bound", "pass"],
    )?;
    let mut samples = out.csv("decay_profiles.csv", &["mode", "component", "t_foot", "distance", "f"])?;
    let mut entries = Vec::new();
    for mode in exp.selected()? {
        let field = mode.field()?;
        let component = cfg.component.unwrap_or_else(|| mode.dominant_component());
        let h = mode.h()?;
        let profiles = cfg
            .feet
            .iter()
            .map(|&t| {
                let p = sample_normal_ray(field.as_ref(), component, t, &distances, Some(cfg.window * h))?;
                Ok(fit_decay(&p, range)?)
            })
            .collect::<Result<Vec<DecayProfile>>>()?;
        for p in &profiles {
            for (d, f) in p.distances.iter().zip(&p.values) {
                samples.row([mode.index.to_string(), component.to_string(), num(p.t_foot), num(*d), num(*f)])?;
            }
        }
        let report = verify_theorem1(&constants, &profiles, cfg.delta, cfg.a1_tolerance)?;
        for v in &report.feet {
            fits.row([
                mode.index.to_string(),
                component.to_string(),
                num(v.t_foot),
                num(v.a0),
                num(v.a1),
                num(v.a2),
                num(v.residual),
                num(v.global_bound.max(v.local_bound)),
                v.passed().to_string(),
            ])?;
        }
        entries.push(DecayEntry { index: mode.index, sigma: mode.sigma, component, report });
    }
    fits.finish()?;
    samples.finish()?;
    let summary = DecaySummary { constants, passed: entries.iter().all(|e| e.report.passed), modes: entries };
    out.json("decay.json", &summary)?;
    Ok(summary)
}

// ------------------------------------------------------------------ verify

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifySummary {
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// A profile whose quadratic coefficient sits `3δ` below the global bound,
/// with seeded noise; the verifier must reject it.
fn negative_control(constants: &PredictedConstants, cfg: &ExperimentConfig) -> Result<Check> {
    let d = &cfg.decay;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let a2 = constants.c_global - 3.0 * d.delta;
    let ts = d.distance_list();
    let fs: Vec<f64> = ts.iter().map(|t| 0.01 + t + a2 * t * t + 1e-9 * rng.random_range(-1.0..1.0)).collect();
    let profile =
        fit_decay(&DecayProfile::synthetic(0.0, 0.025, constants.inf_q, ts, fs), (d.fit_range[0], d.fit_range[1]))?;
    let report = verify_theorem1(constants, &[profile], d.delta, d.a1_tolerance)?;
    Ok(Check {
        name: "negative_control",
        passed: !report.passed,
        detail: format!(
            "synthetic a2 = {:.4} vs bound {:.4}: rejected = {}",
            a2, report.feet[0].global_bound, !report.passed
        ),
    })
}

fn orthogonality(exp: &Experiment) -> Check {
    let computed: Vec<&SteklovMode> =
        exp.modes.iter().filter_map(|m| if let Source::Computed(c) = &m.source { Some(c) } else { None }).collect();
    let Some(first) = computed.first() else {
        return Check { name: "orthogonality", passed: true, detail: "closed-form modes".into() };
    };
    let grid = first.grid();
    let mut worst = 0.0f64;
    for (i, a) in computed.iter().enumerate() {
        for b in &computed[i + 1..] {
            if (a.sigma - b.sigma).abs() > MULTIPLICITY_TOL * a.sigma.abs().max(1.0) {
                worst = worst.max(grid.inner(&a.trace, &b.trace).norm());
            }
        }
    }
    Check { name: "orthogonality", passed: worst <= 1e-8, detail: format!("max |<phi_i, phi_j>| = {worst:.3e}") }
}

pub fn verify(exp: &Experiment, out: &OutputDir) -> Result<VerifySummary> {
    let spec = spectrum(exp, out)?;
    let spectrum_check = match spec.max_reference_error {
        Some(err) => {
            let scale = exp.modes.last().map_or(1.0, |m| m.sigma.max(1.0));
            Check {
                name: "spectrum",
                passed: err <= 1e-6 * scale,
                detail: format!("max error vs closed form {err:.3e}"),
            }
        }
        None => Check {
            name: "spectrum",
            passed: spec.max_residual <= 1e-8,
            detail: format!("max relative residual {:.3e}", spec.max_residual),
        },
    };
    let ext = extend(exp, out)?;
    let worst_ratio = ext.modes.iter().map(|e| e.max_principle.ratio).fold(0.0, f64::max);
    let dec = decay(exp, out)?;
    let feet: Vec<_> = dec.modes.iter().flat_map(|e| &e.report.feet).collect();
    let a1_err = feet.iter().map(|f| (f.a1 - 1.0).abs()).fold(0.0, f64::max);
    let margin = feet.iter().map(|f| f.global_margin.min(f.local_margin)).fold(f64::INFINITY, f64::min);
    let fb = fbi(exp, out)?;
    let zero = fb.tables.iter().map(|t| t.zero_section_fraction).fold(0.0, f64::max);
    let checks = vec![
        spectrum_check,
        orthogonality(exp),
        Check {
            name: "max_principle",
            passed: ext.passed,
            detail: format!("max interior/boundary ratio {worst_ratio:.6}"),
        },
        Check {
            name: "decay",
            passed: dec.passed,
            detail: format!("{} feet, max |a1 - 1| = {a1_err:.2e}, min a2 margin = {margin:.4}", feet.len()),
        },
        Check { name: "fbi", passed: fb.passed, detail: format!("max zero-section fraction {zero:.3e}") },
        negative_control(&dec.constants, &exp.cfg)?,
    ];
    let summary = VerifySummary { passed: checks.iter().all(|c| c.passed), checks };
    out.json("verify.json", &summary)?;
    Ok(summary)
}
