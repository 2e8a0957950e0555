use thiserror::Error;

/// Errors raised by validation, domain preconditions, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol} out of range for alphabet of size {n}")]
    SymbolOutOfRange { symbol: usize, n: usize },

    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,

    #[error("tuple length must be at least {min}, got {got}")]
    TupleTooShort { min: usize, got: usize },

    #[error("expected {expected} entries for n={n}, k={k}, got {got}")]
    LengthMismatch {
        n: usize,
        k: usize,
        expected: usize,
        got: usize,
    },

    #[error("shape mismatch: (n={n_left}, k={k_left}) vs (n={n_right}, k={k_right})")]
    ShapeMismatch {
        n_left: usize,
        k_left: usize,
        n_right: usize,
        k_right: usize,
    },

    #[error("entry {index} is negative ({value:e})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entries sum to {sum:.17e}, more than {tolerance:e} away from 1")]
    SumNotOne { sum: f64, tolerance: f64 },

    #[error("distribution is not stationary: max constraint violation {max_violation:.3e}")]
    NotStationary { max_violation: f64 },

    #[error("path of length {l} is shorter than the required minimum {min}")]
    PathTooShort { l: usize, min: usize },

    #[error(
        "operation requires a strictly positive tuple distribution (zero entry at index {index})"
    )]
    PositivityRequired { index: usize },

    #[error("vector entry {index} must be strictly positive ({value:e})")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("enumeration budget exceeded: needs {required} path-steps, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("{what} did not converge within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("cross-check failed for {what}: {left:.17e} vs {right:.17e}")]
    CrossCheckFailed {
        what: &'static str,
        left: f64,
        right: f64,
    },

    #[error("reconstruction stuck at symbol {at} after {emitted} of {l} steps")]
    ReconstructionStuck { at: usize, emitted: usize, l: usize },

    #[error("reconstruction ended at symbol {end} instead of cycling back to {start}")]
    ReconstructionNotClosed { end: usize, start: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
