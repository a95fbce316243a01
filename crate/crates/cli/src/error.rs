use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pharmarec::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("missing artifact `{0}`")]
    MissingArtifact(PathBuf),

    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for bad input (configs, data, queries), 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Core(pharmarec::Error::Argument(_)) => 1,
            CliError::Parse { .. } | CliError::Invalid(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
