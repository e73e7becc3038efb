use thiserror::Error;

use crate::metric::Violation;
use crate::rational::RationalParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Parse(String),

    #[error(transparent)]
    Rational(#[from] RationalParseError),

    #[error("not a metric space: {0}")]
    InvalidMetric(Violation),

    #[error("tuple lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("point index {index} out of range for a space of {size} points")]
    PointOutOfRange { index: usize, size: usize },

    #[error("need at least {needed} points, space has {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("{what} = {value} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("illegal move at step {step}: {reason}")]
    IllegalMove { step: usize, reason: String },

    #[error("strategy loses: {0}")]
    StrategyLoses(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("strategy tree exceeds {limit} nodes")]
    StrategyTooLarge { limit: usize },

    #[error("internal invariant breached: {0}")]
    Internal(String),
}

impl Error {
    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
