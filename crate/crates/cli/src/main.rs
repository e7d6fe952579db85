//! `dsmdot`: synthesize slab experiments, reconstruct index maps, draw kernels.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dsmdot_core::DsmError;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "dsmdot", version, about = "Direct sampling reconstruction for diffusive optical tomography")]
struct Cli {
    /// Worker threads; falls back to DSMDOT_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the Cauchy data of one experiment.
    Forward(ForwardArgs),
    /// Compute an index map from forward outputs.
    Reconstruct(ReconstructArgs),
    /// Evaluate a point-inclusion kernel.
    Kernel(KernelArgs),
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    /// One of the catalogued slab experiments, 1 to 5.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub example: Option<u32>,
    /// Experiment configuration as JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    #[value(name = "I", alias = "i")]
    I,
    Phi,
    Modified,
    Modified2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::I => "I",
            Method::Phi => "phi",
            Method::Modified => "modified",
            Method::Modified2 => "modified2",
        }
    }
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Directory written by `forward`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "modified2")]
    pub method: Method,
    /// Defaults to `<data>/<method>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelDomain {
    DiskFull,
    DiskHalf,
    Rect,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub domain: KernelDomain,
    /// Inclusion point as `x1,x2`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub z: [f64; 2],
    /// Sampling resolution on the disk.
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected x1,x2 but got {s:?}"));
    }
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([p(parts[0])?, p(parts[1])?])
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Config { path: PathBuf, line: usize, column: usize, message: String },
    #[error(transparent)]
    Core(#[from] DsmError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(
                DsmError::SolverDivergence { .. }
                | DsmError::IncompatibleFlux { .. }
                | DsmError::TruncationNotConverged { .. }
                | DsmError::SegmentTooShort { .. },
            ) => 1,
            _ => 2,
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("DSMDOT_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("DSMDOT_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Forward(a) => commands::forward(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::Kernel(a) => commands::kernel(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
