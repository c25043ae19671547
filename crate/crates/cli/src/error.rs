use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Core(#[from] qudit_phase::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use qudit_phase::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Json(_) => 1,
            CliError::Core(E::ZeroDimension | E::ThetaOutOfRange(_) | E::InvalidArgument(_)) => 1,
            CliError::Core(_) | CliError::Invariant(_) => 2,
        }
    }
}
