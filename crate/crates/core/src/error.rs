//! Shared error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Argument outside the domain of the function being evaluated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Non-removable singularity hit during evaluation.
    #[error("singularity: {0}")]
    Singularity(String),

    /// Points too close together for a divided difference.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Matrix operands of different dimension.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Index out of the admissible range.
    #[error("index error: {0}")]
    Index(String),

    /// Requested size exceeds the hard desk-scale cap.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// Custom permutation weight map missing an entry.
    #[error("invalid character: {0}")]
    InvalidCharacter(String),

    /// det^(1/2) requested on a matrix with negative determinant.
    #[error("negative determinant: {0}")]
    NegativeDeterminant(String),

    /// Subset sum numerically singular for a negative determinant power.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// Symmetric eigenvalue iteration failed to converge.
    #[error("eigensolver failed: {0}")]
    EigenFailed(String),

    /// Inequality identifier not registered with the harness.
    #[error("unknown inequality: {0}")]
    UnknownInequality(String),

    /// Counterexample target not registered with the harness.
    #[error("unknown target: {0}")]
    UnknownTarget(String),

    /// Hornich-Hlawka hypothesis re-check failed in strict mode.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// Malformed configuration, flag value, or input file.
    #[error("config error: {0}")]
    Config(String),
}
