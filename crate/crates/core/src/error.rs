//! Library error type.
//!
//! Operations fail for one of three reasons: malformed input (parse),
//! violated preconditions (geometry or algebra), or I/O when files are
//! involved.  The CLI maps these onto its exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input could not be parsed or deserialized.
    #[error("parse error: {0}")]
    Parse(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// File-system or stream failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
