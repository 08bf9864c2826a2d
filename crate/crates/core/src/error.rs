use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad caller input: dimension mismatch, nonpositive bandwidth, empty sample.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unknown {what} `{name}`")]
    Lookup { what: &'static str, name: String },

    /// A quantity is undefined at the requested point (density below floor, empty region).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
