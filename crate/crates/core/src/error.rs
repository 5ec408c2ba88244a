use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Caller misuse: bad parameters, missing capabilities, bad config.
    #[error("usage error: {0}")]
    Usage(String),

    /// A grid manifest or payload failed validation.
    #[error("ingestion error in field `{field}`: {detail}")]
    Ingestion { field: String, detail: String },

    /// A computation produced a non-finite value.
    #[error("numerical failure in {op}: {detail}")]
    Numerical { op: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }

    pub(crate) fn usage(detail: impl Into<String>) -> Self {
        Error::Usage(detail.into())
    }

    pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical { op, detail: detail.into() }
    }

    pub(crate) fn ingestion(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Ingestion { field: field.into(), detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
