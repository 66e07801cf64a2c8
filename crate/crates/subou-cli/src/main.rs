//! `subou` — config-driven experiments on Ornstein-Uhlenbeck processes
//! driven by subordinated cylindrical noise.
//!
//! Every subcommand reads one TOML config, runs a reproducible computation,
//! and emits CSV (stdout or `--out`). The first CSV line is always a comment
//! carrying the SHA-256 of the config file and the effective seed, so every
//! number in an output can be traced to its inputs. Exit codes: 0 all checks
//! pass, 1 a statistical or hypothesis check failed, 2 invalid input.

// Validation guards are written `!(x > 0.0)` rather than `x <= 0.0` so that
// NaN inputs fail them too; the negated form is the whole point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

/// CLI failure: `code` follows the exit-code contract (2 = invalid input).
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }
}

impl From<subou::Error> for CliError {
    fn from(e: subou::Error) -> Self {
        CliError::invalid(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "subou",
    version,
    about = "Simulation laboratory for stable-subordinated Ornstein-Uhlenbeck dynamics"
)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write CSV here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Override the seed from the [mc] block.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cap the worker-thread count (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare empirical characteristic/Laplace transforms of the clock and
    /// the subordinated noise against their closed forms.
    VerifyCf,
    /// Evaluate the standing hypotheses (noise summability, uniform
    /// smoothing constant, noise lower bound / admissible rate window).
    CheckHypotheses,
    /// Sample a clock path or one Ornstein-Uhlenbeck trajectory.
    Simulate,
    /// Estimate a directional derivative of the semigroup by the exact
    /// weight formula, optionally cross-checked by finite differences.
    Gradient,
    /// Measure the short-time decay of the gradient norm over a horizon grid.
    Sweep,
    /// Bound the probability that discarded spectral tail modes move the
    /// state by more than eps, optionally against an empirical frequency.
    Certificate,
}

/// Everything a command needs besides its own config block.
pub struct Ctx {
    pub config: config::Config,
    pub config_hash: String,
    pub seed: u64,
    pub base_dir: PathBuf,
}

impl Ctx {
    /// Standard CSV preamble: provenance comment plus column names.
    pub fn csv_header(&self, columns: &str) -> String {
        format!(
            "# config_hash={} seed={}\n{columns}\n",
            self.config_hash, self.seed
        )
    }
}

/// CSV text plus the exit code its checks decided on.
pub struct CmdOutput {
    pub csv: String,
    pub exit: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let config_path = cli
        .config
        .ok_or_else(|| CliError::invalid("--config <PATH> is required"))?;
    let bytes = std::fs::read(&config_path).map_err(|e| {
        CliError::invalid(format!("cannot read config {}: {e}", config_path.display()))
    })?;
    let mut config_hash = String::with_capacity(64);
    for byte in Sha256::digest(&bytes) {
        let _ = write!(config_hash, "{byte:02x}");
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::invalid("config file is not valid UTF-8"))?;
    let config = config::Config::parse(&text)?;

    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::invalid(format!("thread pool: {e}")))?;
    }

    let seed = cli
        .seed
        .or(config.mc.as_ref().and_then(|m| m.seed))
        .unwrap_or(0);
    let base_dir = config_path
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Ctx {
        config,
        config_hash,
        seed,
        base_dir,
    };

    let output = match cli.cmd {
        Cmd::VerifyCf => commands::verify_cf::run(&ctx)?,
        Cmd::CheckHypotheses => commands::hypotheses::run(&ctx)?,
        Cmd::Simulate => commands::simulate::run(&ctx)?,
        Cmd::Gradient => commands::gradient::run(&ctx)?,
        Cmd::Sweep => commands::sweep::run(&ctx)?,
        Cmd::Certificate => commands::certificate::run(&ctx)?,
    };

    match cli.out {
        Some(path) => std::fs::write(&path, &output.csv).map_err(|e| {
            CliError::invalid(format!("cannot write {}: {e}", path.display()))
        })?,
        None => print!("{}", output.csv),
    }
    Ok(output.exit)
}
