use thiserror::Error;

/// Failures of a single oracle query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("index {index} out of range [1, {len}]")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("query budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("promise violated: {0}")]
    PromiseViolated(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("neighbor rank {rank} outside [1, {max}]")]
    InvalidRank { rank: usize, max: usize },
    #[error("pair query on a single vertex {0}")]
    SelfPair(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True when the failure is a refused query because a budget ran out.
    pub fn is_budget_exhausted(&self) -> bool {
        matches!(self, Error::Oracle(OracleError::BudgetExhausted { .. }))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
