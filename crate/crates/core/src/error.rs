use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's preconditions.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A file exists but cannot be decoded as an image.
    #[error("decode error: {0}")]
    Decode(String),

    /// A container file is malformed (bad magic, version, or truncation).
    #[error("format error: {0}")]
    Format(String),

    /// A training directory cannot supply a usable dataset.
    #[error("dataset error: {0}")]
    Dataset(String),

    /// An operation was applied to a value in the wrong state.
    #[error("state error: {0}")]
    State(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
