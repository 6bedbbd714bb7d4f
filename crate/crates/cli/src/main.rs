//! `mslab`: command-line front end for the model-space toolkit.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical domain error,
//! 4 certification failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use config::RunConfig;
use output::{OutDir, GENERATED_BY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Carleson constants, frame bounds and kernel norms of a sequence.
    Analyze,
    /// Split a sequence into certified parts.
    Split,
    /// Clark level sets and the Herglotz check.
    Clark,
    /// Exponential systems in L²(-a, a).
    Pw,
}

#[derive(Debug, Parser)]
#[command(name = "mslab", version, about = "Reproducing kernels and Riesz decompositions in model spaces")]
struct Args {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Core(mslab_core::Error),
}

impl From<mslab_core::Error> for CliError {
    fn from(e: mslab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use mslab_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Core(E::InvalidInput(_)) => 2,
            CliError::Core(E::OnSpectrum { .. } | E::DegeneratePoint { .. } | E::Numerical(_)) => 3,
            CliError::Core(E::Certification(_)) => 4,
        }
    }
}

#[derive(Serialize)]
struct FailureReport<'a> {
    generated_by: &'a str,
    command: &'a str,
    failed: bool,
    exit_code: u8,
    error: String,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("MSLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("MSLAB_THREADS={v} is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(args: &Args, out: &OutDir) -> Result<(), CliError> {
    let cfg = RunConfig::load(&args.config)?;
    match args.command {
        Command::Analyze => commands::analyze(&cfg, out),
        Command::Split => {
            let (report, rows, arcs) = commands::split(&cfg)?;
            commands::write_split(out, &report, &rows, arcs.as_deref())
        }
        Command::Clark => commands::clark(&cfg, out, args.seed),
        Command::Pw => commands::pw(&cfg, out),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = configure_threads() {
        eprintln!("mslab: {e}");
        return ExitCode::from(e.exit_code());
    }
    let out = match OutDir::create(&args.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("mslab: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match run(&args, &out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mslab: {e}");
            let code = e.exit_code();
            let name = format!("{:?}", args.command).to_lowercase();
            let report = FailureReport {
                generated_by: GENERATED_BY,
                command: &name,
                failed: true,
                exit_code: code,
                error: e.to_string(),
            };
            if let Err(w) = out.json("error.json", &report) {
                eprintln!("mslab: {w}");
            }
            ExitCode::from(code)
        }
    }
}
