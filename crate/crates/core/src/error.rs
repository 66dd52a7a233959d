use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown visualization `{0}`")]
    UnknownViz(String),

    #[error("visualization `{0}` already exists")]
    DuplicateViz(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("unknown category `{category}` in column `{column}`")]
    UnknownCategory { column: String, category: String },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("link {source_viz} -> {target} would create a cycle")]
    Cycle { source_viz: String, target: String },

    #[error("matrix is not positive definite at leading minor {minor}")]
    NotPositiveDefinite { minor: usize },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("adapter error: {0}")]
    Adapter(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
