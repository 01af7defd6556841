//! Command-line front end: construction, replayable certificates, rendering and the
//! Lie-group covering report.

pub mod commands;
pub mod files;
pub mod json;
pub mod render;

use std::path::PathBuf;

use cantorcert::Error;
use clap::{Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REFUTED: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

/// Default cap on working precision, in bits.
pub const DEFAULT_MAX_PRECISION: u32 = 512;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Schema(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::ChartMismatch(_) => EXIT_USAGE,
                Error::CoverageFailure { .. } | Error::ConstraintFailure { .. } | Error::SampleFailure(_) | Error::ChartExit(_) => {
                    EXIT_REFUTED
                }
                Error::ResourceLimit(_) | Error::PrecisionExhausted(_) | Error::SearchExhausted(_) => EXIT_LIMIT,
                Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
            },
        }
    }
}

/// `CANTORCERT_MAX_PRECISION`, or the default.
pub fn max_precision() -> Result<u32, CliError> {
    match std::env::var("CANTORCERT_MAX_PRECISION") {
        Err(_) => Ok(DEFAULT_MAX_PRECISION),
        Ok(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("CANTORCERT_MAX_PRECISION = `{s}` is not a bit count"))),
    }
}

#[derive(Debug, Parser)]
#[command(name = "cantorcert", version, about = "Certified stably intersecting Cantor sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a pair, certify its covering and write pair.json, region.json, certificate.json, report.txt.
    Construct {
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// 2 × 2 rational matrix A, one row per line.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        kappa: Option<String>,
        /// Keep every N-th class of a pair built with cN classes.
        #[arg(long)]
        thin: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Replay a certificate, or certify a pair at a given δ.
    Verify {
        pair: PathBuf,
        region: PathBuf,
        certificate: Option<PathBuf>,
        /// Certify afresh at this δ (hex dyadic or p/q) instead of replaying.
        #[arg(long)]
        delta: Option<String>,
    },
    /// Depth-k boxes of a pair as SVG.
    Render {
        pair: PathBuf,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = render::DEFAULT_MAX_BOXES)]
        max_boxes: u128,
        #[arg(long, value_enum, default_value_t = render::Which::Both)]
        side: render::Which,
    },
    /// Simplex lattice, radius and conjugation checks for GL(d).
    Liecover {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        kappa: String,
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Run a parsed command, printing to stdout and stderr; returns the exit status.
pub fn run(cli: Cli) -> i32 {
    let r = match cli.command {
        Command::Construct { gamma, c, eps, dim, matrix, kappa, thin, out } => {
            commands::construct(&commands::ConstructArgs { gamma, c, eps, dim, matrix, kappa, thin, out })
        }
        Command::Verify { pair, region, certificate, delta } => commands::verify(&pair, &region, certificate.as_deref(), delta.as_deref()),
        Command::Render { pair, depth, out, max_boxes, side } => commands::render(&pair, depth, &out, max_boxes, side),
        Command::Liecover { dim, kappa, samples, seed, out } => commands::liecover(dim, &kappa, samples, seed, &out),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parse `args` (program name first) and run; clap errors exit with status 1.
pub fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
