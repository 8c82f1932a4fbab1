//! Error type shared by every module of the crate.

use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index {index} out of range (count {count})")]
    IndexOutOfRange { index: u64, count: u64 },

    #[error("lambda is not integral: {l} does not divide C(n-t, k-t) = {binom}")]
    NonIntegralLambda { l: u64, binom: BigUint },

    #[error("{what} is {size}, which exceeds the configured cap of {cap}")]
    CapExceeded { what: &'static str, size: String, cap: String },

    #[error("malformed block #{index}: {reason}")]
    MalformedBlock { index: usize, reason: String },

    #[error("subset is empty")]
    EmptySubset,

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("lattice is not full rank: rank {rank} < dimension {dim}")]
    NotFullRank { rank: usize, dim: usize },

    #[error("covariance matrix is singular")]
    SingularCovariance,

    #[error("precondition of {lemma} violated: {condition}")]
    PreconditionViolated { lemma: &'static str, condition: String },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("operation requires a design incidence system (t-sets in k-sets)")]
    NotDesignSystem,

    #[error("search budget exceeded after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}
