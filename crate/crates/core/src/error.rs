use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate atom{}: {reason}", index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    DegenerateAtom {
        index: Option<usize>,
        reason: String,
    },

    #[error("plan infeasible for branch {branch}: {reason}")]
    PlanInfeasible { branch: usize, reason: String },

    #[error("wavelet comb overlap: {0}")]
    CombOverlap(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
