use thiserror::Error;

/// Errors raised by the graphon toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or matrix dimensions do not line up.
    #[error("shape error: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    /// A built-in graphon was constructed with parameters that leave [0, 1].
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// More Chebyshev degrees were requested than the quadrature resolves.
    #[error("aliasing: {n_basis} basis functions need at least {needed} quadrature nodes, have {available}")]
    Aliasing {
        n_basis: usize,
        needed: usize,
        available: usize,
    },

    /// The operation is defined only for a different graphon representation.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A request would exceed a hard resource bound.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Malformed textual input.
    #[error("parse error in {field}: {reason}")]
    Parse { field: String, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn parse(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::parse("csv", e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
