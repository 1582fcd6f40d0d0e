use std::path::PathBuf;

/// Errors surfaced by the file formats, the harness and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] matchlab_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("statistical check failed: {0}")]
    Statistical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 IO, 2 validation, 3 capacity, 4 statistical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            Error::Core(matchlab_core::Error::Capacity { .. }) => 3,
            Error::Core(_) | Error::Parse { .. } => 2,
            Error::Statistical(_) => 4,
        }
    }
}
