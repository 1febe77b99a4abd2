use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyDimension { rows: usize, cols: usize },
    #[error("expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("index ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(&'static str),
    #[error("sampled cell ({row}, {col}) has zero probability")]
    ZeroProbabilitySample { row: usize, col: usize },
    #[error("cell ({row}, {col}) is nonzero but has zero probability")]
    ZeroProbabilityCell { row: usize, col: usize },
    #[error("stable rank {stable_rank} is below epsilon_rel^2 = {required}")]
    HypothesisViolated { stable_rank: f64, required: f64 },
    #[error("invalid request: {0}")]
    InvalidRequest(&'static str),
}
