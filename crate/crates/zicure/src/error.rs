use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid data in {path}:\n{}", .problems.join("\n"))]
    Validation { path: PathBuf, problems: Vec<String> },
    #[error("data: {0}")]
    Data(String),
    #[error("fit did not converge ({0}); report written anyway")]
    NonConvergence(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Model(#[from] zicure_core::Error),
}

impl CliError {
    /// Process exit code: 1 usage, 2 data validation, 3 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Format { .. } | CliError::Io { .. } => 1,
            CliError::Validation { .. } | CliError::Data(_) | CliError::Model(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> CliError {
        CliError::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
