//! Command-line driver: configs in, reports and grids out.
//!
//! Exit codes: 0 success, 1 quantitative failure, 2 input error.

// `!(a < b)` is deliberate: NaN has to fail the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

pub mod analyze;
pub mod config;
pub mod model;
pub mod output;
pub mod reduce;
pub mod solve;
pub mod verify;

use config::RunConfig;
use model::Model;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Verify,
    Solve,
    Reduce,
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

fn load(inv: &Invocation) -> Result<(RunConfig, Model), CliError> {
    let mut cfg = RunConfig::load(&inv.config)?;
    if let Some(s) = inv.seed {
        cfg.verify.seed = s;
    }
    if let Some(t) = inv.tol {
        if !(t > 0.0) {
            return Err(CliError::Input(format!("--tol must be positive, got {t}")));
        }
        cfg.verify.tol = t;
    }
    if inv.command == Command::Verify {
        if let Some(n) = inv.samples {
            cfg.verify.samples = n;
        }
    }
    if inv.samples == Some(0) {
        return Err(CliError::Input("--samples must be positive".into()));
    }
    let model = Model::build(&cfg)?;
    Ok((cfg, model))
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))
}

/// Runs one command and returns the process exit code; diagnostics go to stderr.
pub fn run(inv: &Invocation) -> i32 {
    match dispatch(inv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(inv: &Invocation) -> Result<i32, CliError> {
    let (cfg, model) = load(inv)?;
    out_dir(&inv.out)?;
    match inv.command {
        Command::Verify => {
            let report = verify::run(&cfg, &model)?;
            output::write_json(&inv.out.join("report.json"), &report)?;
            for c in report.checks.iter().filter(|c| !c.pass) {
                let kind = if c.hard { "FAIL" } else { "soft" };
                eprintln!("{kind}: {} residual {:e} > {:e}", c.name, c.max_residual, c.tolerance);
            }
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Analyze => {
            let seed = inv.seed.unwrap_or(cfg.verify.seed);
            let a = analyze::run(&cfg, &model, inv.samples.unwrap_or(1), seed)?;
            output::write_json(&inv.out.join("analysis.json"), &a)?;
            Ok(0)
        }
        Command::Solve => {
            let solved = solve::run(&cfg, &model)?;
            output::write(&inv.out.join("map.csv"), &solved.csv)?;
            output::write_json(&inv.out.join("summary.json"), &solved.summary)?;
            let s = &solved.summary;
            eprintln!(
                "{}: energy {:e} -> {:e} in {} iterations ({})",
                s.name, s.initial_energy, s.final_energy, s.iterations, s.termination
            );
            Ok(if s.converged { 0 } else { 1 })
        }
        Command::Reduce => {
            let r = reduce::run(&cfg, &model)?;
            let path = inv.out.join(format!("{}.json", r.config.name));
            output::write_json(&path, &r.config)?;
            let d = r.dims;
            println!(
                "order {} system with p = {}, n = {}: first-order n = {}, jet dimension {}; binomial counts {} (total space), {} (jet space)",
                d.r, d.p, d.n, d.extended_n, d.jet_dim, d.binomial_total_space, d.binomial_jet_dim
            );
            println!("{}", path.display());
            Ok(0)
        }
    }
}
