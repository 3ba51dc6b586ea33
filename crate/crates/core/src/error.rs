use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative numerical routine failed.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The fit cannot be posed with the data supplied.
    #[error("ill-posed fit: {0}")]
    IllPosed(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// Configuration problem, tagged with the offending key.
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
