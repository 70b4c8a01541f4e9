//! Report envelope, input hashing and the exit-code contract.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use secant_scope::psolve::SolveOptions;
use secant_scope::Error;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "secant-scope";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// A verification suite found a mismatch.
    Failed = 1,
    Invalid = 2,
    Solver = 3,
    Ambiguous = 4,
    OutOfRegime = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub msg: String,
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError {
            exit: Exit::Invalid,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

pub fn exit_for(e: &Error) -> Exit {
    match e {
        Error::InvalidParameters(_)
        | Error::Parse(_)
        | Error::FieldMismatch { .. }
        | Error::ZeroForm
        | Error::NonSquare { .. }
        | Error::ZeroPolynomial(_)
        | Error::ContractViolation(_) => Exit::Invalid,
        Error::PathFailureCap { .. }
        | Error::NonConvergence { .. }
        | Error::NonFiniteSuspect { .. }
        | Error::RetryExhausted { .. }
        | Error::SingularMatrix => Exit::Solver,
        Error::AmbiguousThreshold { .. } | Error::RankAmbiguous { .. } => Exit::Ambiguous,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            exit: exit_for(&e),
            msg: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// The command as run: everything that determines the output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<String>,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub tolerance_overrides: BTreeMap<String, Value>,
    pub format: Format,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub solver: SolveOptions,
    pub zero_form: f64,
    pub line_dedup: f64,
    pub record_residual: f64,
    pub subresultant_zero: f64,
    pub rank_rel_cutoff: f64,
    pub rank_min_gap: f64,
    pub sample_residual: f64,
}

impl Tolerances {
    pub fn new(solver: &SolveOptions) -> Self {
        Tolerances {
            solver: solver.clone(),
            zero_form: secant_scope::secant::ZERO_FORM_TOL,
            line_dedup: secant_scope::secant::LINE_DEDUP_TOL,
            record_residual: secant_scope::secant::RECORD_RESIDUAL_TOL,
            subresultant_zero: secant_scope::binary_forms::SUBRESULTANT_ZERO_TOL,
            rank_rel_cutoff: secant_scope::linalg::RANK_REL_CUTOFF,
            rank_min_gap: secant_scope::linalg::RANK_MIN_GAP,
            sample_residual: secant_scope::strata::SAMPLE_RESIDUAL_TOL,
        }
    }
}

#[derive(Serialize)]
pub struct Report<R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub input_sha256: String,
    pub seed: u64,
    pub config: RunConfig,
    pub tolerances: Tolerances,
    pub assumptions: Vec<String>,
    pub status: String,
    pub result: R,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Hash of the input files in order, or of the config when there are none.
pub fn input_hash(config: &RunConfig, inputs: &[Vec<u8>]) -> String {
    if inputs.is_empty() {
        let canon = serde_json::to_vec(config).expect("config serializes");
        return sha256_hex(&canon);
    }
    let mut h = Sha256::new();
    for b in inputs {
        h.update(b);
    }
    format!("{:x}", h.finalize())
}

pub fn read_input(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn write_output(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError {
            exit: Exit::Invalid,
            msg: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn to_json_text<R: Serialize>(r: &Report<R>) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}
