use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SvcError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("forbidden: {0}")]
    Forbidden(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("storage error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt store at {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

impl SvcError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SvcError::Io { path: path.into(), source }
    }
}

pub type SvcResult<T> = std::result::Result<T, SvcError>;
