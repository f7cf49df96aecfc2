use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] hidden_matching::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{0}")]
    Other(String),
}

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAP: u8 = 3;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use hidden_matching::Error as E;
        match self {
            CliError::Usage(_) | CliError::Json { .. } => EXIT_USAGE,
            CliError::Core(e) if e.is_cap_exceeded() => EXIT_CAP,
            CliError::Core(
                E::InvalidSize(_)
                | E::OddSize(_)
                | E::InvalidParameter(_)
                | E::Parse(_)
                | E::EmptyFamily(_)
                | E::ContinuousRandomness
                | E::InvalidMatching(_)
                | E::InvalidProtocol(_)
                | E::LengthMismatch { .. },
            ) => EXIT_USAGE,
            CliError::Core(_) | CliError::Io { .. } | CliError::Other(_) => EXIT_FAILURE,
        }
    }
}
