use thiserror::Error;

/// Errors raised by the decomposition and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sparsity pattern is not chordal")]
    NotChordal,
    #[error("problem has no constraints or no variables")]
    EmptyProblem,
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("symmetric eigensolver did not converge (n = {n})")]
    EigFailure { n: usize },
    #[error("factorization failed: matrix is not numerically positive definite (pivot {pivot} = {value:e})")]
    FactorizationFailure { pivot: usize, value: f64 },
    #[error("invalid problem data: {0}")]
    InvalidProblem(&'static str),
    #[error("invalid solver option: {0}")]
    InvalidOption(&'static str),
}
