//! `gapforge`: spectral gaps of PU(d) gate sets from the command line.
//!
//! Standard output carries exactly one document per run; per-block progress
//! goes to standard error as NDJSON.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gapforge_core::GapError;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "gapforge", version, about = "Spectral gaps at finite scale and calculable gap bounds for gate sets in PU(d)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "GAPFORGE_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result document here instead of standard output.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Suppress NDJSON progress records on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NetVariant {
    Thm2,
    Scale,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// t0, alpha and beta for one (d, eps0), or the reference tables.
    Constants {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        eps0: Option<f64>,
        /// Emit every reference row for d = 2, 3, 4 (or only --d when given).
        #[arg(long)]
        table: bool,
    },
    /// Highest weights of the irreps at scale t.
    Weights {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// gap_t of a gate set.
    Gap {
        gates: PathBuf,
        #[arg(long)]
        t: usize,
        /// Include every block norm in the output.
        #[arg(long)]
        per_irrep: bool,
        /// Use S ∪ S⁻¹ for a non-symmetric file instead of rejecting it.
        #[arg(long)]
        auto_symmetrize: bool,
        /// Largest irrep dimension to build before giving up (exit code 3).
        #[arg(long)]
        dim_cap: Option<u128>,
        /// Project nearly unitary matrices onto the unitary group on load.
        #[arg(long)]
        repair: bool,
    },
    /// g_{t0}(S) from the squared-generator subsets.
    Gtzero {
        gates: PathBuf,
        #[arg(long)]
        eps0: f64,
        /// Compute subset gaps at this scale instead of t0 (desk-scale runs).
        #[arg(long)]
        t_override: Option<u64>,
        #[arg(long)]
        repair: bool,
    },
    /// Lower bound alpha·g·ln(beta t)^(-2c) on gap_t(S).
    Bound {
        gates: PathBuf,
        #[arg(long)]
        eps0: f64,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        t_override: Option<u64>,
        #[arg(long)]
        repair: bool,
    },
    /// Word length sufficient for an eps-net.
    NetLength {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: f64,
        /// gap(S) for thm2, gap_t(S) for scale.
        #[arg(long)]
        gap: f64,
        #[arg(long, value_enum, default_value_t = NetVariant::Thm2)]
        variant: NetVariant,
    },
    /// Fraction of Haar samples within eps of a word of length <= len.
    NetEmpirical {
        gates: PathBuf,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = gapforge_core::gates::DEFAULT_WORD_CAP)]
        word_cap: usize,
        #[arg(long)]
        repair: bool,
    },
    /// Haar-random symmetric gate set as JSON.
    RandomGates {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<GapError> for Failure {
    fn from(e: GapError) -> Self {
        let code = match &e {
            GapError::Io(_) | GapError::Format(_) => 1,
            GapError::InvalidArgument(_) | GapError::NotUnitary { .. } => 2,
            GapError::ResourceCap(_) => 3,
            GapError::Numerical(_) => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).format_timestamp(None).init();
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not configure the thread pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
