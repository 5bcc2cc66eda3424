use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {what} outside the representable positive range")]
    Range { what: String },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("min(1, t) is not in the parameter space ({0})")]
    Membership(String),

    #[error("guard violated: {0}")]
    Guard(String),

    #[error("K-profile invariants violated at t = {points:?}: {reason}")]
    InvariantViolation { reason: String, points: Vec<f64> },

    #[error("every candidate decomposition has infinite cost")]
    EmptyCandidates,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
