use qsot::QsotError;
use thiserror::Error;

/// CLI failure, mapped one-to-one onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

impl From<QsotError> for CliError {
    fn from(e: QsotError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
