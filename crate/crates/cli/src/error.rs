use qrf_core::QrfError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Unsupported(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<QrfError> for CliError {
    fn from(e: QrfError) -> Self {
        match e {
            QrfError::UnsupportedReflection { .. }
            | QrfError::GimbalLock { .. }
            | QrfError::ImproperFrame
            | QrfError::Domain { .. } => CliError::Unsupported(e.to_string()),
            QrfError::NotInvariant { .. } => CliError::Verification(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
