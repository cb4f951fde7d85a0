use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants follow how a caller should react: configuration and domain
/// errors mean the request itself is invalid, format errors mean an input
/// document could not be interpreted.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An invalid hash or experiment configuration (for example `m` out of range).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Arguments outside an operation's domain.
    #[error("{0}")]
    Domain(String),

    /// A document (proof file, CSV, hex string) that does not match its format.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! domain_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(format!($($arg)*))
    };
}

macro_rules! format_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Format(format!($($arg)*))
    };
}

pub(crate) use domain_err;
pub(crate) use format_err;
