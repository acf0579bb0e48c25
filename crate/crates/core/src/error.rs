use thiserror::Error;

/// Errors raised by kernel validation, the analytic routines and the
/// Monte-Carlo harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state space is empty")]
    EmptyStateSpace,

    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("invalid transition probability {value} at ({row}, {col})")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("stationary distribution is not unique (invariant subspace of dimension {dimension})")]
    NonUniqueStationary { dimension: usize },

    #[error("power iteration did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("no mixing time found within horizon {horizon}")]
    NotMixing { horizon: usize },

    #[error("{name} = {value} is out of range (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("Poisson system is singular beyond the constant direction")]
    SingularSystem,

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("coupling horizon too short: remainder bound {remainder} exceeds 1% of {value}")]
    HorizonTooShort { remainder: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::OutOfRange {
        name,
        value,
        expected,
    }
}
