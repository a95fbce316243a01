use std::path::PathBuf;

/// Errors raised by the pipeline. Every variant maps onto one of the CLI's
/// exit classes via [`Error::is_validation`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: missing column `{column}`")]
    Schema { file: String, column: String },

    #[error("{file}: row {row}: {message}")]
    Row {
        file: String,
        row: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("training diverged at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::Argument(message.into())
    }

    /// True for data/schema problems (as opposed to runtime failures).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Schema { .. } | Error::Row { .. } | Error::Validation(_) => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Attaches a stage label to an error.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
