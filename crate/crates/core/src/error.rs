use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomial has no numerically non-zero coefficients")]
    DegenerateInput,
    #[error("duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("boundary-value transform is singular for duration {0}")]
    SingularTransform(f64),
    #[error("timestamp {got} does not follow the last stored timestamp {last}")]
    NonMonotoneTimestamp { last: f64, got: f64 },
    #[error("need at least {needed} horizon samples, have {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("prediction duration {prediction} does not match compensator duration {compensator}")]
    DurationMismatch { prediction: f64, compensator: f64 },
    #[error("search bracket [{lo}, {hi}] is empty or too narrow")]
    BracketCollapse { lo: f64, hi: f64 },
    #[error("could only place {placed} of {requested} robots without overlap")]
    PackingFailure { placed: usize, requested: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed file: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
