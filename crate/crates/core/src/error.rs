use thiserror::Error;

use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown {kind} `{label}`")]
    UnknownLabel { kind: &'static str, label: String },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("conditioning on a zero-probability event: {0}")]
    ZeroMass(String),
    #[error("posterior family does not average to the prior product")]
    MeanMismatch,
    #[error("budget of {limit} exceeded while {during}")]
    BudgetExceeded { limit: usize, during: &'static str },
    #[error("value {value} outside [0, 1]")]
    OutOfUnitInterval { value: Rational },
    #[error("committed value {0} is not positive")]
    NonPositiveCommittedValue(Rational),
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
