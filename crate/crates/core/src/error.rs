use std::path::PathBuf;

/// Errors produced by the codec.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed bytes. `offset` is the byte position where decoding failed.
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: usize, msg: String },

    /// An input stream is inconsistent with the rest of the manifest.
    #[error("input error in {stream}: {msg}")]
    Input { stream: String, msg: String },

    #[error("clip {index}: {source}")]
    Clip {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(offset: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            msg: msg.into(),
        }
    }

    pub(crate) fn input(stream: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Input {
            stream: stream.into(),
            msg: msg.into(),
        }
    }

    /// Attaches the file the error came from.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Stable short code used by the command line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Format { .. } => "format",
            Error::Input { .. } => "input",
            Error::Clip { source, .. } | Error::File { source, .. } => source.code(),
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Byte offset of the innermost format error, if any.
    pub fn offset(&self) -> Option<usize> {
        match self {
            Error::Format { offset, .. } => Some(*offset),
            Error::Clip { source, .. } | Error::File { source, .. } => source.offset(),
            _ => None,
        }
    }
}
