//! The `codp` command-line tool.
//!
//! Exit codes: 0 success, 1 syntax error, 2 type or unit error, 64 usage
//! error (bad flags, missing file, missing seed), 65 invalid data file,
//! 74 output error, 70 internal failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use codp_dsl::DslError;
use codp_uav::UavError;

pub mod grid;
pub mod histogram;
pub mod plot;
mod solve;
mod uav;

#[derive(Debug, Parser)]
#[command(name = "codp", version, about = "Monotone co-design problems: diagrams, queries and the UAV study")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and type-check a diagram.
    Check { path: PathBuf },
    /// Print a diagram in canonical form.
    Fmt { path: PathBuf },
    /// Fix functionalities, minimize resources.
    Solve(SolveArgs),
    /// The UAV case study.
    #[command(subcommand)]
    Uav(UavCommand),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub path: PathBuf,
    /// Parameter box value, `name=value`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Outer functionality value, `node.port=value`; replaces the file's queries.
    #[arg(long = "query", value_name = "NODE.PORT=VALUE")]
    pub query: Vec<String>,
    /// Required when the diagram draws from a kernel.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: TableFormat,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum UavCommand {
    /// Deterministic cost-optimal front over all battery technologies.
    Front(FrontArgs),
    /// Cost distribution of one technology at one payload.
    Distribution(DistributionArgs),
    /// Monte Carlo payload sweep.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Component tables (JSON) replacing the shipped ones.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output formats, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// Output directory; stdout when absent (one format only).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FrontArgs {
    /// `start:stop:step` or a comma separated list, grams.
    #[arg(long)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct DistributionArgs {
    #[arg(long)]
    pub tech: String,
    /// Grams.
    #[arg(long)]
    pub payload: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Sample every parameter at its tabulated value.
    #[arg(long)]
    pub zero_variance: bool,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Technologies, comma separated; all when absent.
    #[arg(long, value_delimiter = ',')]
    pub tech: Vec<String>,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub zero_variance: bool,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("{path}: {source}")]
    Diagram { path: String, source: DslError },
    #[error(transparent)]
    Uav(#[from] UavError),
    #[error("{0}")]
    Internal(String),
    #[error("{path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Dsl(e) | CliError::Diagram { source: e, .. } => e.exit_code(),
            CliError::Uav(UavError::InvalidParameter(_) | UavError::UnknownTech(_)) => 64,
            CliError::Uav(UavError::Data(_)) => 65,
            CliError::Uav(UavError::Io(_) | UavError::Csv(_)) | CliError::Output { .. } => 74,
            CliError::Uav(_) | CliError::Internal(_) => 70,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) fn read_input(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub(crate) fn write_output(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Output { path: path.display().to_string(), source })
}

pub(crate) fn to_json_bytes<T: serde::Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| CliError::Internal(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Check { path } => solve::check(&path),
        Command::Fmt { path } => solve::fmt(&path),
        Command::Solve(args) => solve::solve(&args),
        Command::Uav(cmd) => uav::run(cmd),
    }
}

/// Sizes the global thread pool from `CODP_THREADS`.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("CODP_THREADS") else {
        return Ok(());
    };
    let n: usize = match v.trim().parse() {
        Ok(n) if n >= 1 => n,
        _ => return Err(CliError::Usage(format!("CODP_THREADS must be a positive integer, got '{v}'"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
