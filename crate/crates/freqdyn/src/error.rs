use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("horizon error: {0}")]
    Horizon(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("tail of condition ({condition}) does not close below cap {cap}")]
    DivergingTail { condition: &'static str, cap: u64 },

    #[error("truncation error: discarded tail bound {bound:e} exceeds allowance {allowance:e}")]
    Truncation { bound: f64, allowance: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
