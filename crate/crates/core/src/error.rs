use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector has a non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("point is not a member of the feasible set")]
    NotAMember,

    #[error("enumeration refused: more than {cap} members")]
    EnumerationRefused { cap: usize },

    #[error("invalid feasible set: {0}")]
    InvalidSet(String),

    #[error("graph contains a cycle")]
    Cycle,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no round records to aggregate")]
    EmptyRecords,
}
