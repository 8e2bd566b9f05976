use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a norm: generators do not span R^{0}")]
    NotANorm(usize),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("exact norm required")]
    ExactNormRequired,
    #[error("certified comparison undecided at eps {0}; tighten eps")]
    Undecided(String),
    #[error("coherence violation between leaves {0} and {1}")]
    Coherence(String, String),
    #[error("scan budget {budget} exceeded (last index tried {last})")]
    BudgetExceeded { budget: u64, last: u64 },
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Error {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Error {
        Error::Io(e.to_string())
    }
}
