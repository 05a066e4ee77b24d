use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient truncation order: need {needed}, have {available}")]
    Truncation { needed: usize, available: usize },

    #[error("enumeration cap exceeded: more than {cap} vectors within bound {bound}")]
    EnumerationCap { cap: usize, bound: i64 },

    #[error("numerical certification failed: {0}")]
    Certification(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
