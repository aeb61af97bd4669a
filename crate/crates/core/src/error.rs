use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid task count {requested}: {reason}")]
    InvalidTaskCount { requested: usize, reason: String },

    #[error("{kind} id {id} out of bounds (size {size})")]
    OutOfBounds {
        kind: &'static str,
        id: usize,
        size: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite gradient at batch {batch}")]
    NonFiniteGradient { batch: usize },

    #[error("evaluation set is empty")]
    EmptyEvalSet,

    #[error("retention row {0} already filled")]
    RetentionRowFilled(usize),

    #[error("retention matrix incomplete: {0}")]
    IncompleteRetention(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
