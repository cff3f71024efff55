use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The input is not a square row-stochastic matrix.
    #[error("malformed transition matrix: {0}")]
    Structural(String),

    #[error("invalid size: {0}")]
    InvalidSize(String),

    /// A dense or exhaustive computation would exceed its configured cap.
    #[error("{what}: {size} exceeds the cap of {cap}")]
    Capacity {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a bijection: {0}")]
    NotABijection(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A precondition on the inputs of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An input violates a contract the operation relies on (e.g. symmetry).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A postcondition failed during an analysis.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
