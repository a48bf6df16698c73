use std::path::PathBuf;

use anpkit_core::Error as CoreError;
use anpkit_valsvc::SvcError;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("missing {path}: run `anpkit {stage}` first")]
    Prerequisite { stage: &'static str, path: PathBuf },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io { path, source } => CliError::Io { path, source },
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SvcError> for CliError {
    fn from(e: SvcError) -> Self {
        match e {
            SvcError::Io { path, source } => CliError::Io { path, source },
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn io_errors_exit_2_everything_else_1() {
        let io = CliError::io("x", std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), 2);
        assert_eq!(CliError::validation("bad").exit_code(), 1);
        let pre = CliError::Prerequisite {
            stage: "discover",
            path: "out/candidates/en.jsonl".into(),
        };
        assert_eq!(pre.exit_code(), 1);
        assert!(pre.to_string().contains("anpkit discover"));
    }

    #[test]
    fn core_errors_keep_their_class() {
        let e: CliError = CoreError::io("f", std::io::Error::other("x")).into();
        assert_eq!(e.exit_code(), 2);
        let e: CliError = CoreError::invalid("nope").into();
        assert_eq!(e.exit_code(), 1);
    }
}
