use thiserror::Error;

/// Failure of a command, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    NonConvergence(String),
    #[error("reconciliation failed: {0}")]
    Reconciliation(String),
    #[error("run failed: {0}")]
    Run(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn validation(field: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{field}: {msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Reconciliation(_) => 4,
            CliError::Run(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<minority_cavity::CavityError> for CliError {
    fn from(e: minority_cavity::CavityError) -> Self {
        CliError::NonConvergence(e.to_string())
    }
}
