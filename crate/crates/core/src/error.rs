use thiserror::Error;

/// Errors raised by the game model, the strategies and the evaluators.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("n = {0} is not a supported size (need an even power of two between 2 and 64)")]
    InvalidSize(usize),

    #[error("n = {0} is odd; perfect matchings need an even number of vertices")]
    OddSize(usize),

    #[error("{what}: requested {requested}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("the {0} matching family is empty")]
    EmptyFamily(&'static str),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("malformed outcome: {0}")]
    MalformedOutcome(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("strategy uses continuous shared randomness and cannot be evaluated exactly")]
    ContinuousRandomness,

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by a configured enumeration cap rather than bad input.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
