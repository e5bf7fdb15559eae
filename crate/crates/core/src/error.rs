use thiserror::Error;

/// Errors raised by the mechanism, the player model and the scenario harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid participant count {0}: at least one envelope is required")]
    InvalidParticipantCount(usize),

    #[error("scale parameter overflows for {0} participants")]
    ScaleOverflow(usize),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("vote computation needs at least two alternatives, got {0}")]
    DegenerateAlternatives(usize),

    #[error("deposit {value} on alternative {alternative} is negative or not finite")]
    NegativeDeposit { alternative: usize, value: f64 },

    #[error("vote vector sums to {0}, expected zero")]
    NonZeroSum(f64),

    #[error("shape mismatch: expected length {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("no participants submitted an envelope")]
    NoParticipants,

    #[error("selection probability {probability} for alternative {alternative} leaves [0, 1]")]
    BeliefInfeasible {
        alternative: usize,
        probability: f64,
    },

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
