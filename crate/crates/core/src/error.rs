use thiserror::Error;

/// Errors raised by model construction, evaluation, truncation and solving.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node configuration is not sorted at index {index}: {prev} > {next}")]
    UnsortedNodes { index: usize, prev: f64, next: f64 },

    #[error("expected {expected} nodes, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("inverted bounds: lo = {lo} > hi = {hi}")]
    InvertedBounds { lo: f64, hi: f64 },

    #[error("empty probe grid")]
    EmptyGrid,

    #[error("field too sparse: {0}")]
    SparseField(String),

    #[error("admissibility violation: {0}")]
    Admissibility(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate field: every local maximum is -inf")]
    DegenerateField,

    #[error("grid of {size} configurations exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    /// True for the error classes that describe a structural property of the
    /// problem (sparse field, admissibility, degenerate field) rather than bad input.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            Error::SparseField(_) | Error::Admissibility(_) | Error::DegenerateField
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
