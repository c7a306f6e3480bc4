//! Command line front end: config ingestion, dispatch, report emission.
//!
//! Exit codes: 0 success, 2 invalid input or a request the data cannot
//! certify as posed, 3 precision or budget exhaustion, 101 internal panic.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use selfsim::ball::PrecisionContext;
use selfsim::Error;

mod commands;
mod output;

#[derive(Parser)]
#[command(
    name = "selfsim",
    version,
    about = "Certified quantities of homogeneous self-similar measures",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// IFS configuration file (JSON)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Working precision in bits
    #[arg(long, global = true, default_value_t = 128)]
    pub precision: u32,

    /// Precision-escalation ceiling in bits
    #[arg(long, global = true, default_value_t = 8192)]
    pub max_precision: u32,

    /// Monte Carlo seed; all randomness flows from it
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Cap on large enumerations, in bytes
    #[arg(long, global = true, value_name = "BYTES")]
    pub memory_cap: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Quadrature,
    Montecarlo,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepQuantity {
    Deltan,
    Garsia,
    Dim,
}

#[derive(Subcommand)]
pub enum Command {
    /// Mahler measure of an integer polynomial (default: the contraction's
    /// minimal polynomial from the config)
    Mahler {
        /// Comma-separated coefficients, constant term first
        #[arg(long, value_name = "C0,C1,...")]
        poly: Option<String>,
    },
    /// Absolute logarithmic height of an algebraic number given by its
    /// minimal polynomial
    Height {
        #[arg(long, value_name = "C0,C1,...")]
        poly: Option<String>,
    },
    /// Search for the first level with exactly coinciding atoms
    Overlap {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
    /// Minimum distance between distinct level-n atoms
    Deltan {
        #[arg(long)]
        n: usize,
        /// Enumerate all pairs instead of the meet-in-the-middle search
        #[arg(long)]
        exhaustive: bool,
    },
    /// Check delta_n >= c^n level by level
    SepProbe {
        /// Base of the exponential threshold, in (0,1)
        #[arg(long, value_name = "P/Q")]
        c: String,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
    /// All coefficient polynomials with |P(lambda)| below a radius
    NearOverlap {
        #[arg(long)]
        n: usize,
        #[arg(long, value_name = "P/Q")]
        radius: String,
    },
    /// Level entropies H_n and the subadditive bracket min H_n/n
    Garsia {
        /// Comma-separated levels (default 1..=n-max)
        #[arg(long, value_name = "N1,N2,...")]
        levels: Option<String>,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Entropy of the level-n measure at a given scale
    ScaleEntropy {
        #[arg(long)]
        n: usize,
        #[arg(long, value_name = "P/Q")]
        scale: String,
    },
    /// Smoothed-entropy gain of the translation measure under dilation
    Phi {
        #[arg(long)]
        a: Option<f64>,
        /// Comma-separated dilations for a series run
        #[arg(long, value_name = "A1,A2,...")]
        a_list: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Quadrature)]
        method: Method,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Dimension upper bounds from the entropy bracket
    Dim {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
    /// Consistency of the entropy bracket against the dilation-gain lower
    /// bound at the polynomial's Mtilde
    LbphiCheck {
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Override the dilation (default: Mtilde of the contraction)
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, value_enum, default_value_t = Method::Quadrature)]
        method: Method,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// One quantity across a grid of rational contraction ratios
    Sweep {
        /// "start:end:step" or a comma-separated list of rationals
        #[arg(long, value_name = "GRID")]
        lambda_grid: String,
        #[arg(long, value_enum)]
        quantity: SweepQuantity,
        /// Level for deltan, maximum level for garsia/dim
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
}

impl Cli {
    pub fn context(&self) -> PrecisionContext {
        PrecisionContext::new(self.precision, self.max_precision)
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::AmbiguousCollapse { .. }
        | Error::AmbiguousBreakpoint(_)
        | Error::DegenerateRoot(_) => 2,
        Error::NoConvergence { .. } | Error::MemoryBudget { .. } | Error::BudgetExceeded(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // a pool may already exist when tests drive main() twice; that is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match commands::run(&cli) {
        Ok(outcome) => match output::emit(&cli, &outcome) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {}", e);
                ExitCode::from(2)
            }
        },
        Err(e) => {
            let code = exit_code_for(&e);
            output::emit_error(&cli, &e);
            ExitCode::from(code)
        }
    }
}
