//! Error classes mapped onto the exit-code contract:
//! 0 success, 1 usage, 2 data, 3 verification failure.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<trueknn::Error> for CliError {
    fn from(err: trueknn::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

pub fn data_err(err: impl std::fmt::Display) -> CliError {
    CliError::Data(err.to_string())
}
