use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO_OR_CONFIG: i32 = 1;
    pub const EMPTY_INPUT: i32 = 2;
    pub const FORMAT: i32 = 3;
    pub const INSUFFICIENT_DATA: i32 = 4;
    pub const SPEC: i32 = 5;
    pub const USAGE: i32 = 64;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] irhvac::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("missing input: {0}")]
    Missing(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use irhvac::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => exit::IO_OR_CONFIG,
            CliError::Missing(_) => exit::EMPTY_INPUT,
            CliError::Insufficient(_) => exit::INSUFFICIENT_DATA,
            CliError::Core(e) => match e {
                E::Io { .. }
                | E::InvalidParameter(_)
                | E::BandOutOfRange { .. }
                | E::PeriodOutOfRange { .. } => exit::IO_OR_CONFIG,
                E::EmptyInput(_) => exit::EMPTY_INPUT,
                E::Format { .. }
                | E::Domain { .. }
                | E::EmptyRoi(_)
                | E::DimensionMismatch(_)
                | E::GridMismatch(_) => exit::FORMAT,
                E::TooShort(_) | E::TooGappy(_) | E::Degenerate(_) => exit::INSUFFICIENT_DATA,
                E::Spec(_) | E::Layout(_) => exit::SPEC,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct_per_class() {
        let cases = [
            (CliError::Config("x".into()), 1),
            (CliError::Missing("x".into()), 2),
            (irhvac::Error::EmptyInput("x".into()).into(), 2),
            (
                irhvac::Error::Format {
                    path: "r.json".into(),
                    message: "m".into(),
                }
                .into(),
                3,
            ),
            (irhvac::Error::TooShort("x".into()).into(), 4),
            (CliError::Insufficient("x".into()), 4),
            (irhvac::Error::Spec("x".into()).into(), 5),
            (irhvac::Error::Layout("x".into()).into(), 5),
        ];
        for (e, code) in cases {
            assert_eq!(e.exit_code(), code, "{e}");
        }
    }
}
