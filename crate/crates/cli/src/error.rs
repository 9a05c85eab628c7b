use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{0}")]
    Positivity(String),
    #[error("{0}")]
    MissingMetadata(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 2,
            CliError::Positivity(_) => 3,
            CliError::MissingMetadata(_) => 4,
            CliError::MissingInput(_) => 5,
            CliError::Numerical(_) | CliError::Io { .. } => 6,
        })
    }
}

impl From<opuc_core::Error> for CliError {
    fn from(e: opuc_core::Error) -> Self {
        use opuc_core::Error as E;
        match e {
            E::PositivityLoss { .. } => CliError::Positivity(e.to_string()),
            E::MissingMetadata(_) => CliError::MissingMetadata(e.to_string()),
            E::InvalidParameter(_) | E::Truncation { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
