use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "invalid layer sizes {0:?}: expected 5 positive entries (input, three hidden, actions)"
    )]
    InvalidLayerSizes(Vec<usize>),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("action {action} out of range for {count} actions")]
    InvalidAction { action: usize, count: usize },

    #[error("risk-sensitive mode requires a finite, nonzero beta (got {0})")]
    InvalidBeta(f64),

    #[error(
        "exponential utility saturated on {count} term(s); returns too large for beta = {beta}"
    )]
    Saturation { count: usize, beta: f64 },

    #[error("gradient estimate needs at least one trajectory")]
    EmptyBatch,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bound is vacuous: {0}")]
    Degenerate(&'static str),

    #[error("checkpoint parse error: {0}")]
    Checkpoint(String),

    #[error("unsupported checkpoint header {found:?} (expected {expected:?})")]
    CheckpointVersion {
        found: String,
        expected: &'static str,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("records do not share a configuration: {0}")]
    MismatchedRecords(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for failures caused by numerics (saturation, NaN/Inf) rather than
    /// bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Saturation { .. } | Error::NonFinite(_))
    }

    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidBeta(_)
                | Error::InvalidLayerSizes(_)
                | Error::InvalidInput(_)
        )
    }
}
