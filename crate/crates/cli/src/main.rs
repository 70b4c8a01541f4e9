mod commands;
mod report;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Format;

#[derive(Parser, Debug)]
#[command(name = "secant-scope", version, about = "Multisecant lines, gonality and strata dimensions of space curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub tol: TolFlags,
}

/// Solver overrides; defaults are the library defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct TolFlags {
    /// Backward residual accepted at path endpoints.
    #[arg(long, global = true)]
    pub residual_tol: Option<f64>,
    /// Fraction of failed paths tolerated per gamma attempt.
    #[arg(long, global = true)]
    pub failure_cap: Option<f64>,
    #[arg(long, global = true)]
    pub gamma_attempts: Option<usize>,
    /// Multistart Newton starts for the rescue (0 disables it).
    #[arg(long, global = true)]
    pub rescue_starts: Option<usize>,
    /// Grassmannian charts used by the secant searches.
    #[arg(long, global = true, value_enum)]
    pub charts: Option<ChartArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ChartArg {
    Generic,
    Coordinate,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Secant order and the gonality report of a curve file.
    Analyze {
        #[command(subcommand)]
        kind: AnalyzeKind,
    },
    /// Emit a curve file, with a planted secant line unless --random.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
    /// All lines meeting the curve in length at least k.
    Secants {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verification suites.
    Verify {
        #[command(subcommand)]
        kind: VerifyKind,
    },
    /// Search the numeric hypotheses of the theorem layer.
    Hypcheck(HypArgs),
    /// Randomized property suites.
    Selftest {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeKind {
    Rational(AnalyzeArgs),
    Ci {
        #[command(flatten)]
        common: AnalyzeArgs,
        /// Assert that the curve is not bielliptic.
        #[arg(long)]
        non_bielliptic: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum ConstructKind {
    Rational {
        #[arg(long)]
        d: usize,
        /// Length of the planted secant; required unless --random.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// A random valid curve without a planted line.
        #[arg(long)]
        random: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Ci {
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        random: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyKind {
    /// Local dimensions of the standard strata charts against the closed forms.
    Dims {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quadrisecant counts of random rational curves.
    Counts {
        /// Curve degrees, 5 to 7.
        #[arg(long = "d", value_delimiter = ',', default_values_t = vec![5, 6])]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        curves: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    #[value(name = "thm1-4")]
    Thm14,
    #[value(name = "thm1-10")]
    Thm110,
}

#[derive(Args, Debug)]
pub struct HypArgs {
    /// Complete intersection type; sets alpha, d(C) and the f range.
    #[arg(long, requires = "b")]
    pub a: Option<usize>,
    #[arg(long, requires = "a")]
    pub b: Option<usize>,
    #[arg(long, conflicts_with = "a")]
    pub alpha: Option<i64>,
    #[arg(long, conflicts_with = "a")]
    pub dc: Option<usize>,
    /// The `p <= alpha` of the first mode; defaults to alpha.
    #[arg(long)]
    pub p: Option<i64>,
    #[arg(long)]
    pub f_min: Option<i64>,
    #[arg(long)]
    pub f_max: Option<i64>,
    /// Bound on the divisor degree in condition c); defaults to d(C) - 3.
    #[arg(long)]
    pub d_max: Option<i64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Thm14)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit as u8)
        }
    }
}
