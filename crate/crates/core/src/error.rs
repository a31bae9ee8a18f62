use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid tilt: {0}")]
    InvalidTilt(f64),

    #[error("covariance not PD: {0}")]
    NotPositiveDefinite(String),

    #[error("zero IQR for pollutant {pollutant} at period {period}")]
    ZeroIqr { pollutant: usize, period: usize },

    #[error("cache drift {0:e} exceeds audit tolerance")]
    CacheDrift(f64),

    #[error("zero variance")]
    ZeroVariance,

    #[error("chain too short: need at least {min} draws, got {got}")]
    ChainTooShort { min: usize, got: usize },

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),
}

impl Error {
    /// True for failures that come from the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotPositiveDefinite(_) | Error::ZeroVariance | Error::CacheDrift(_))
    }

    pub(crate) fn dim(what: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            got,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
