use std::path::PathBuf;

use clap::{Parser, Subcommand};
use jetlab::{Command, Invocation};

#[derive(Parser)]
#[command(name = "jetlab", version, about = "Harmonic maps and PDE systems on jet spaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (JSON).
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Number of jet points (analyze defaults to 1, verify to the config value).
    #[arg(long)]
    samples: Option<usize>,
    /// Sampling seed, overriding `verify.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Identity tolerance, overriding `verify.tol`.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump Christoffels, connections, spray, torsion, fields at seeded jet points.
    Analyze(Common),
    /// Run every identity check and write report.json.
    Verify(Common),
    /// Minimize the least-squares energy on the grid; writes map.csv and summary.json.
    Solve(Common),
    /// Rewrite a higher-order config as its first-order prolongation.
    Reduce(Common),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (command, c) = match cli.command {
        Cmd::Analyze(c) => (Command::Analyze, c),
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Reduce(c) => (Command::Reduce, c),
    };
    std::process::exit(jetlab::run(&Invocation {
        command,
        config: c.config,
        out: c.out,
        samples: c.samples,
        seed: c.seed,
        tol: c.tol,
    }));
}
