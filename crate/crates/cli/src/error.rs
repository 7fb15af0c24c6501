use std::io;
use std::path::PathBuf;

use hto_core::HtoError;
use thiserror::Error;

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;
pub const EXIT_INADMISSIBLE: u8 = 5;
pub const EXIT_TRUNCATION: u8 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot parse {}: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },

    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),

    #[error("{0}")]
    Core(#[from] HtoError),

    #[error("{what}: {value:.3e} exceeds tolerance {tolerance:.1e}")]
    Tolerance { what: String, value: f64, tolerance: f64 },

    /// A decision came out inadmissible; the certificate has already been written.
    #[error("inadmissible: {0}")]
    Verdict(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } => EXIT_PARSE,
            CliError::Write(_) => 1,
            CliError::Tolerance { .. } => EXIT_NUMERIC,
            CliError::Verdict(_) => EXIT_INADMISSIBLE,
            CliError::Core(e) => match e {
                HtoError::Format(_) => EXIT_PARSE,
                HtoError::Shape(_) | HtoError::Invariant { .. } | HtoError::Contract(_) | HtoError::Unsupported(_) => {
                    EXIT_INVARIANT
                }
                HtoError::Numeric(_) | HtoError::Consistency { .. } | HtoError::Resource(_) => EXIT_NUMERIC,
                HtoError::Inadmissible { .. } | HtoError::NotInSpan { .. } => EXIT_INADMISSIBLE,
                HtoError::BracketFailure { .. } | HtoError::Truncation(_) => EXIT_TRUNCATION,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
