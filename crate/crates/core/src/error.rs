use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("population is empty")]
    EmptyPopulation,

    #[error("decision variable {index} = {value} lies outside [0, 1]")]
    OutOfBounds { index: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration field `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("no consultation has completed yet")]
    NoConsultation,

    #[error("run aborted")]
    Aborted,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
