//! `sectorial`: run experiment configs, the randomized selftest, and the
//! sequence generators.
//!
//! Exit codes: 0 ok, 1 hypothesis violated, 2 numerical failure, 3 bad
//! config or arguments.

mod config;
mod experiments;
mod inputs;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use sectorial::generators::{example45, random_nonclosable, random_penalization, random_sectorial_sequence, Example45Config};
use sectorial::selftest::run_selftest;
use sectorial::{Execution, Tolerance};

use config::{ExperimentConfig, Overrides, DEFAULT_SEED};
use experiments::{classify, Outcome, Status};

#[derive(Parser)]
#[command(name = "sectorial", version, about = "Sectorial forms, m-sectorial relations and their limits")]
struct Cli {
    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its report and CSV series.
    Run {
        config: PathBuf,
        /// Sets rank, PSD and convergence tolerances at once.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Contour half-angle for semigroup experiments.
        #[arg(long)]
        contour_theta_prime: Option<f64>,
        /// Quadrature nodes (per contour panel, or on the holomorphy circle).
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Randomized check of the structural theorems; prints a transcript.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        /// Also write selftest.report.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write a form sequence as JSON, usable as a `file` sequence input.
    Generate {
        #[command(subcommand)]
        family: Family,
        /// Output file; stdout when absent.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Family {
    /// The finite-difference Laplacian family with a rank-one perturbation.
    Example45 {
        #[arg(long)]
        grid_size: usize,
        #[arg(long, default_value_t = 50)]
        n_max: u64,
    },
    /// Nondecreasing sectorial forms on nested domains.
    Random {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        length: usize,
        #[arg(long, default_value_t = 0.7)]
        theta: f64,
    },
    /// a + n·p with a random sectorial a and accretive p.
    Penalization {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
        #[arg(long, default_value_t = 0.7)]
        theta: f64,
        #[arg(long, default_value_t = 20)]
        length: usize,
    },
    /// Non-closable presentations with a nondecreasing drift.
    Nonclosable {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
        #[arg(long, default_value_t = 20)]
        length: usize,
        /// Keep the presentation map injective.
        #[arg(long)]
        injective: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::ConfigError.code() as u8 } else { 0 });
        }
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let code = match cli.command {
        Command::Run { config, tol, seed, out_dir, contour_theta_prime, nodes } => {
            let overrides = Overrides { tol, seed, out_dir, contour_theta_prime, nodes };
            run(&config, &overrides, exec)
        }
        Command::Selftest { seed, instances, out_dir } => selftest(seed, instances, out_dir.as_deref(), exec),
        Command::Generate { family, out } => match generate(family, out.as_deref()) {
            Ok(()) => Status::Ok,
            Err(e) => {
                eprintln!("error: {e:#}");
                classify(&e)
            }
        },
    };
    ExitCode::from(code.code() as u8)
}

fn run(path: &Path, overrides: &Overrides, exec: Execution) -> Status {
    let cfg = match ExperimentConfig::load(path, overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Status::ConfigError;
        }
    };
    let outcome = experiments::run(&cfg, exec).unwrap_or_else(|e| Outcome::failed(classify(&e), format!("{e:#}")));
    for d in &outcome.diagnostics {
        eprintln!("{}: {d}", cfg.name);
    }
    match output::write(&cfg, &outcome) {
        Ok(path) => println!("{} {:?} -> {}", cfg.experiment.kind(), outcome.status, path.display()),
        Err(e) => {
            eprintln!("error: writing report: {e:#}");
            return Status::ConfigError;
        }
    }
    outcome.status
}

fn selftest(seed: u64, instances: usize, out_dir: Option<&Path>, exec: Execution) -> Status {
    let report = run_selftest(seed, instances, exec);
    print!("{}", report.transcript());
    if let Some(dir) = out_dir {
        let written = std::fs::create_dir_all(dir)
            .map_err(anyhow::Error::from)
            .and_then(|()| Ok(serde_json::to_string_pretty(&report)?))
            .and_then(|text| std::fs::write(dir.join("selftest.report.json"), text + "\n").context("writing selftest report"));
        if let Err(e) = written {
            eprintln!("error: {e:#}");
            return Status::ConfigError;
        }
    }
    if report.passed() {
        Status::Ok
    } else {
        Status::HypothesisViolation
    }
}

fn generate(family: Family, out: Option<&Path>) -> anyhow::Result<()> {
    let tol = Tolerance::default();
    let seq = match family {
        Family::Example45 { grid_size, n_max } => example45(&Example45Config::new(grid_size, (1..=n_max).collect())?, &tol)?,
        Family::Random { seed, dim, length, theta } => random_sectorial_sequence(seed, dim, length, theta)?,
        Family::Penalization { seed, max_dim, theta, length } => random_penalization(seed, max_dim, theta, length, &tol)?,
        Family::Nonclosable { seed, max_dim, length, injective } => random_nonclosable(seed, max_dim, length, injective, &tol)?,
    };
    let text = serde_json::to_string_pretty(&seq)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
