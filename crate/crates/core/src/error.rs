use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A formula was evaluated outside its domain. `what` names the failing sub-expression.
    #[error("domain error: {what}")]
    Domain { what: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("region `{0}` covers no pixel centre")]
    EmptyRoi(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("series grids differ: {0}")]
    GridMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("too many missing samples: {0}")]
    TooGappy(String),

    #[error("period {period} s outside the analysable range ({min} s, {max} s)")]
    PeriodOutOfRange { period: f64, min: f64, max: f64 },

    #[error("band [{low}, {high}] Hz does not overlap the analysed range")]
    BandOutOfRange { low: f64, high: f64 },

    #[error("invalid scenario: {0}")]
    Spec(String),

    #[error("invalid frame layout: {0}")]
    Layout(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(what: impl Into<String>) -> Self {
        Error::Domain { what: what.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
