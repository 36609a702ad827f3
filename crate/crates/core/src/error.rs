use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid k: {0}")]
    InvalidK(String),

    #[error("missing decision label for provider `{0}`")]
    MissingLabel(String),

    #[error("too many attributes for enumeration: {count} > {limit}")]
    TooManyAttributes { count: usize, limit: usize },

    #[error("reduced decision system has no attributes")]
    EmptyRds,

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("dynamic reading backend unavailable: {0}")]
    BackendUnavailable(String),

    #[error("unknown or non-dynamic attribute `{0}`")]
    UnknownAttribute(String),

    #[error("registry is empty")]
    EmptyRegistry,

    #[error("unknown provider `{0}`")]
    UnknownProvider(String),

    #[error("provider `{provider}` was not in the latest ranking for user `{user}`")]
    NotRanked { user: String, provider: String },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by the filesystem rather than by input content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
