use thiserror::Error;

use crate::scalar::FieldKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field mismatch: {left} vs {right}")]
    FieldMismatch { left: FieldKind, right: FieldKind },

    #[error("operation requires a nonzero form")]
    ZeroForm,

    #[error("ambiguous numeric verdict in {context}: value {value:.3e} within one decade of threshold {threshold:.3e}")]
    AmbiguousThreshold {
        context: &'static str,
        value: f64,
        threshold: f64,
    },

    #[error("ambiguous numerical rank in {context}: singular-value gap {gap:.3e}")]
    RankAmbiguous { context: &'static str, gap: f64 },

    #[error("root finder did not converge after {attempts} attempts")]
    NonConvergence { attempts: usize },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("system is not square: {equations} equations in {variables} variables")]
    NonSquare { equations: usize, variables: usize },

    #[error("system contains a zero polynomial at index {0}")]
    ZeroPolynomial(usize),

    #[error("path-failure ratio {failed}/{tracked} exceeds cap after {attempts} gamma attempts")]
    PathFailureCap {
        failed: usize,
        tracked: usize,
        attempts: usize,
    },

    #[error("solution set looks positive-dimensional: {singular} of {tracked} paths ended on rank-deficient points")]
    NonFiniteSuspect { singular: usize, tracked: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("retry budget exhausted after seeds {seeds:?}: {reason}")]
    RetryExhausted { seeds: Vec<u64>, reason: String },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
