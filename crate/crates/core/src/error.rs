use thiserror::Error;

/// Errors returned by sketch, estimator, token, and simulation operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("incompatible parameters: {field} differs ({left} vs {right})")]
    IncompatibleParams {
        field: &'static str,
        left: u32,
        right: u32,
    },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid register value {value:#x} at index {index}")]
    InvalidRegister { index: usize, value: u64 },

    #[error("bad magic byte {found:#04x}, expected {expected:#04x}")]
    BadMagic { expected: u8, found: u8 },

    #[error("truncated input: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),

    #[error("malformed token set: {0}")]
    MalformedTokens(String),

    #[error("aggregation needs at least 2 runs, got {0}")]
    TooFewRuns(usize),

    #[error("invalid simulation plan: {0}")]
    InvalidPlan(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
