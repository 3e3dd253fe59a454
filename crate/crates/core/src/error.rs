use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape or extent mismatch. `axis` names the offending axis when one applies.
    #[error("dimension error{}: {message}", axis.map(|a| format!(" on axis {a}")).unwrap_or_default())]
    Dimension { axis: Option<usize>, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("label error: {0}")]
    Label(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("training diverged at epoch {epoch}: {message}")]
    Divergence { epoch: usize, message: String },

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("format error in {path}: expected {expected} bytes, found {actual}")]
    Format {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("schema error in record {record}: {message}")]
    Schema { record: String, message: String },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(axis: impl Into<Option<usize>>, message: impl Into<String>) -> Self {
        Error::Dimension {
            axis: axis.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class.
    ///
    /// | code | class |
    /// |------|-------|
    /// | 1 | configuration, schema, label, domain, aggregation |
    /// | 2 | I/O and raw-file format |
    /// | 3 | numeric divergence |
    /// | 4 | dimension and internal consistency |
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Schema { .. }
            | Error::Label(_)
            | Error::Domain(_)
            | Error::Aggregation(_) => 1,
            Error::Io { .. } | Error::Format { .. } => 2,
            Error::Numeric(_) | Error::Divergence { .. } => 3,
            Error::Dimension { .. } | Error::Internal(_) => 4,
        }
    }
}
