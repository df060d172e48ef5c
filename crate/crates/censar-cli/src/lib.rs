//! Batch pipeline around the `censar` library: CSV ingestion of dyadic flow
//! panels, per-year estimation with Louis standard errors, forensic
//! screening, and CSV/JSON report emission.

pub mod config;
pub mod panel;
pub mod pipeline;
pub mod report;

use thiserror::Error;

/// CLI-level error classes, mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Input data failed validation (exit code 2).
    #[error("data validation: {0}")]
    Data(String),
    /// Estimation or screening failed numerically (exit code 3).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// I/O or configuration problems (exit code 2).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<censar::Error> for CliError {
    fn from(e: censar::Error) -> Self {
        match &e {
            censar::Error::InvalidSize(_) | censar::Error::InvalidArgument(_) => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
