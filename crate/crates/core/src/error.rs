use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The quantity is mathematically undefined for the given input.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("degenerate walk distribution: {0}")]
    DegenerateDistribution(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
