use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} outside universe of size {universe}")]
    IndexOutOfRange { index: usize, universe: usize },

    #[error("set lives in a universe of size {got}, expected {expected}")]
    UniverseMismatch { expected: usize, got: usize },

    #[error("empty set has no scan statistic")]
    EmptySet,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("family too large to enumerate: reached {reached} members (cap {cap})")]
    TooLargeToEnumerate { reached: u64, cap: u64 },

    #[error("no family member of size {size}: {reason}")]
    NoMemberOfSize { size: usize, reason: String },

    #[error("no family member with size in band [{low}, {high}]")]
    EmptyBand { low: usize, high: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{kind} observations required")]
    WrongMode { kind: &'static str },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
