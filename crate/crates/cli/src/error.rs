use ionage_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    /// 0 success, 1 usage/validation, 2 I/O, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Io { .. } => CliError::Io(msg),
            CoreError::IntegrationFailure(_)
            | CoreError::DegenerateSchedule(_)
            | CoreError::NoSensitivity(_) => CliError::Numerical(msg),
            _ => CliError::Validation(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
