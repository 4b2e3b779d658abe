//! `steklov`: runs configured Steklov experiments and writes CSV and JSON
//! artifacts.
//!
//! Exit codes: 0 success, 1 numerical failure or a failed `verify`, 2 an
//! invalid configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::ExperimentConfig;
use output::OutputDir;
use pipeline::{CliError, Experiment};

#[derive(Parser)]
#[command(name = "steklov", version, about = "Steklov eigenfunction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest eigenpairs: spectrum.csv and spectrum.json.
    Spectrum(Args),
    /// Harmonic extension of the selected modes at points or on a lattice.
    Extend(Args),
    /// Phase-space transforms and weighted norms.
    Fbi(Args),
    /// Normal-ray decay fits checked against the predicted constants.
    DecayFit(Args),
    /// Runs every stage and aggregates pass/fail.
    Verify(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for automatic.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Mode indices to use, overriding the config's selection.
    #[arg(long = "mode", value_delimiter = ',')]
    modes: Vec<usize>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config: String,
    unix_time: u64,
    threads: usize,
}

impl Command {
    fn split(self) -> (&'static str, Args) {
        match self {
            Command::Spectrum(a) => ("spectrum", a),
            Command::Extend(a) => ("extend", a),
            Command::Fbi(a) => ("fbi", a),
            Command::DecayFit(a) => ("decay-fit", a),
            Command::Verify(a) => ("verify", a),
        }
    }
}

fn main() -> ExitCode {
    let (name, args) = Cli::parse().command.split();

    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if !args.modes.is_empty() {
        cfg.selection = config::Selection { indices: Some(args.modes.clone()), sigma_range: None };
        if let Err((_, message)) = cfg.validate() {
            eprintln!("error: --mode: {message}");
            return ExitCode::from(2);
        }
    }
    let root = args.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("steklov-out"));
    cfg.output = Some(root.clone());

    if args.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build_global() {
            eprintln!("error: cannot configure {} threads: {e}", args.threads);
            return ExitCode::from(1);
        }
    }

    match run(name, &args, cfg, &root) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Selection(m)) => {
            eprintln!("error: {}: {m}", args.config.display());
            ExitCode::from(2)
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("error[{}]: {e}", e.module());
            ExitCode::from(1)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error[io]: {e}");
            ExitCode::from(1)
        }
    }
}

/// Runs one subcommand; `Ok(false)` means `verify` found a failing check.
fn run(name: &str, args: &Args, cfg: ExperimentConfig, root: &std::path::Path) -> Result<bool, CliError> {
    let out = OutputDir::create(root)?;
    out.json("resolved_config.json", &cfg)?;
    out.json(
        "metadata.json",
        &Metadata {
            tool: "steklov",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: name,
            config: args.config.display().to_string(),
            unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            threads: rayon::current_num_threads(),
        },
    )?;

    let exp = Experiment::solve(cfg)?;
    match name {
        "spectrum" => {
            let s = pipeline::spectrum(&exp, &out)?;
            println!("{} eigenvalues, max residual {:.3e}", s.modes, s.max_residual);
            if let Some(err) = s.max_reference_error {
                println!("max deviation from closed form {err:.3e}");
            }
        }
        "extend" => {
            let s = pipeline::extend(&exp, &out)?;
            println!("extended {} mode(s); maximum principle {}", s.modes.len(), verdict(s.passed));
        }
        "fbi" => {
            let s = pipeline::fbi(&exp, &out)?;
            println!("{} table(s); zero-section check {}", s.tables.len(), verdict(s.passed));
        }
        "decay-fit" => {
            let s = pipeline::decay(&exp, &out)?;
            for e in &s.modes {
                for f in &e.report.feet {
                    println!(
                        "mode {} foot {:.4}: a1 = {:.5}, a2 = {:.4} (bound {:.4}) {}",
                        e.index,
                        f.t_foot,
                        f.a1,
                        f.a2,
                        f.global_bound.max(f.local_bound),
                        verdict(f.passed())
                    );
                }
            }
        }
        "verify" => {
            let s = pipeline::verify(&exp, &out)?;
            for c in &s.checks {
                println!("{} {}: {}", verdict(c.passed), c.name, c.detail);
            }
            return Ok(s.passed);
        }
        _ => unreachable!(),
    }
    Ok(true)
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}
