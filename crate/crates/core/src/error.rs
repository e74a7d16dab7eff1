use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, VolterraError>;

/// Errors reported by the numerical operators.
#[derive(Debug, Error)]
pub enum VolterraError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation would hit a non-integrable singularity.
    #[error("singularity: {0}")]
    Singularity(String),

    /// An iterative evaluation failed to converge within its budget.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A statistical estimator received degenerate data.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Random sampling failed (e.g. covariance factorization broke down).
    #[error("sampling error: {0}")]
    Sampling(String),

    /// The requested computation is outside the regime the scheme is valid in.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// Non-finite values appeared where finite ones are required.
    #[error("numerical error: {0}")]
    Numerical(String),
}
