use thiserror::Error;

use crate::id::FactorId;

/// Errors raised by set construction, algebra and learning.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("negative exponent at ({row}, {col})")]
    NegativeExponent { row: usize, col: usize },
    #[error("duplicate factor id {0}")]
    DuplicateId(FactorId),
    #[error("assignment lacks factor {0}")]
    MissingFactor(FactorId),
    #[error("factor value {value} for {id} lies outside [-1, 1]")]
    OutOfRange { id: FactorId, value: f64 },
    #[error("length {len} is not divisible by {rows}")]
    NotDivisible { len: usize, rows: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("trajectory too short: need at least 2 states, got {0}")]
    TooShort(usize),
    #[error("duplicate monomial {0:?}")]
    DuplicateMonomial(Vec<u32>),
    #[error("rank deficient: rank {rank} < required {required}")]
    RankDeficient { rank: usize, required: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no feasible factor values found after {restarts} restarts")]
    Infeasible { restarts: usize },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::ShapeMismatch(msg.into())
}
