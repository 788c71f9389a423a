use thiserror::Error;

/// Error type shared by the whole crate.
///
/// The variants map onto the process exit codes used by the `qasym` binary:
/// invalid input exits 1, numerical failures exit 2, and violations of a
/// property that should hold on every valid instance exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("property violation: {0}")]
    PropertyViolation(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Exit code associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimMismatch(_) | Error::InvalidInput(_) => 1,
            Error::Numerical(_) | Error::Internal(_) => 2,
            Error::PropertyViolation(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
