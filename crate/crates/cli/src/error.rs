use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("degenerate measurement: {0}")]
    Degenerate(String),
    #[error("oracle mismatch: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 1 i/o, 3 validation, 4 degeneracy, 5 oracle mismatch. Usage errors
    /// exit with 2 from the argument parser.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::Mismatch(_) => 5,
        })
    }
}

impl From<weakwave::Error> for CliError {
    fn from(e: weakwave::Error) -> Self {
        use weakwave::Error::*;
        match e {
            NullPostSelection(_) | DegenerateProfile | ZeroNorm | EmptyBin(_) | TooFewBins { .. } => {
                CliError::Degenerate(e.to_string())
            }
            Io(m) => CliError::Io(m),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
