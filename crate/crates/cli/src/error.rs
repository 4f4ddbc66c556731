use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Instance {
        path: PathBuf,
        source: ibp_core::Error,
    },

    #[error(transparent)]
    Core(#[from] ibp_core::Error),

    #[error("could not start thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for usage, 2 for I/O and parsing, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        use ibp_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Threads(_) => 1,
            CliError::Io { .. } | CliError::Instance { .. } => 2,
            CliError::Core(e) => match e {
                E::InvalidArgument(_) | E::Capacity { .. } => 1,
                E::Parse { .. } => 2,
                E::Numeric(_) | E::Convergence { .. } => 3,
            },
        }
    }
}
