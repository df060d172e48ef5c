use thiserror::Error;

/// Errors produced by model construction, estimation, and screening.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension or size precondition was violated.
    #[error("invalid size: {0}")]
    InvalidSize(String),

    /// An argument failed validation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `A(rho)` has non-positive determinant or failed to factorize; the
    /// caller should shrink the step toward `rho = 0`.
    #[error("infeasible rho {rho:?}: {reason}")]
    InfeasibleRho { rho: Vec<f64>, reason: String },

    /// A matrix that must be invertible is numerically singular.
    #[error("singular matrix in {context} (condition number ~{cond:.3e})")]
    Singular { context: String, cond: f64 },

    /// The truncation region has numerically zero probability; review the
    /// censoring threshold.
    #[error("degenerate truncation region: {0}; review the censoring threshold")]
    DegenerateTruncation(String),

    /// A numerical routine failed to converge or produced invalid output.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
