use thiserror::Error;

/// CLI failure, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<vkde::Error> for CliError {
    fn from(e: vkde::Error) -> Self {
        use vkde::Error::*;
        match e {
            Argument(_) | Lookup { .. } | Unsupported(_) => CliError::Usage(e.to_string()),
            Domain(_) | Numeric(_) => CliError::Numeric(e.to_string()),
        }
    }
}
