use alloc::string::String;
use core::fmt;

/// Errors raised by the matching algorithms, preference models and engines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input: bad index, duplicate entry, shape mismatch, non-positive weight.
    Validation(String),
    /// An enumeration or brute-force search would exceed its configured cap.
    Capacity {
        what: &'static str,
        required: Option<u128>,
        cap: u128,
    },
    /// An operation precondition does not hold (unstable matching, rotation not exposed, ...).
    Precondition(String),
    /// The operation is not defined for this model variant.
    Unsupported(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::Capacity {
                what,
                required: Some(required),
                cap,
            } => write!(f, "capacity error: {what} requires {required}, cap is {cap}"),
            Error::Capacity {
                what,
                required: None,
                cap,
            } => write!(f, "capacity error: {what} exceeds cap {cap}"),
            Error::Precondition(msg) => write!(f, "precondition failed: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported operation: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
