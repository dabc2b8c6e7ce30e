use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A record in an input file could not be parsed. `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate id `{id}` ({path}:{line})")]
    DuplicateId { path: PathBuf, line: usize, id: String },

    #[error("query `{0}` has no terms after tokenization")]
    EmptyQuery(String),

    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,

    #[error("unknown document `{0}`")]
    UnknownDocument(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index format error: {0}")]
    IndexFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
