use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dataset or model file content is malformed.
    #[error("{}: {message}", location(path, *line))]
    Format {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("vocabulary error: {0}")]
    Vocabulary(String),

    /// A vector went non-finite during training.
    #[error("numerical error at step {step}: {message}")]
    Numerical { step: u64, message: String },

    #[error("inference error: {0}")]
    Inference(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("model version mismatch: {0}")]
    Version(String),
}

fn location(path: &std::path::Path, line: Option<usize>) -> String {
    match line {
        Some(line) => format!("{}:{}", path.display(), line),
        None => path.display().to_string(),
    }
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
