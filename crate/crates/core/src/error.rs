use std::path::PathBuf;

use thiserror::Error;

use crate::graph::EpisodeKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: conflicting signs for {first}-{second} in {episode}")]
    Conflict {
        line: u64,
        episode: EpisodeKey,
        first: String,
        second: String,
    },

    #[error("episode {0} not found")]
    NotFound(EpisodeKey),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate scale: all {0} values are equal")]
    DegenerateScale(usize),

    #[error("season {0} has zero mean {1}")]
    ZeroSeasonMean(u32, &'static str),

    #[error("ranked variables `{0}` and `{1}` are collinear")]
    Collinear(String, String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

/// Coarse error class, used by the command-line front end for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Validation,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::Json { .. } => ErrorKind::Parse,
            Error::Conflict { .. }
            | Error::NotFound(_)
            | Error::Validation(_)
            | Error::Config(_) => ErrorKind::Validation,
            Error::InsufficientData(_)
            | Error::DegenerateScale(_)
            | Error::ZeroSeasonMean(..)
            | Error::Collinear(..) => ErrorKind::Numerical,
            Error::Io { .. } => ErrorKind::Io,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
