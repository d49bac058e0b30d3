use thiserror::Error;

use crate::rational::Rational;

/// Rejections from [`crate::model::validate_instance`] and instance construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("instance needs at least one agent and one room")]
    Empty,
    #[error("{agents} agents but {rooms} rooms")]
    CountMismatch { agents: usize, rooms: usize },
    #[error("duplicate {kind} label {label:?}")]
    DuplicateLabel { kind: &'static str, label: String },
    #[error("total rent must be positive, got {0}")]
    NonPositiveRent(Rational),
    #[error("valuation matrix is {rows}x{cols}, expected {expected}x{expected}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("agent {agent} has negative value for room {room}")]
    NegativeValue { agent: String, room: String },
    #[error("values of agent {agent} sum to {actual}, expected {expected}")]
    RowSumMismatch {
        agent: String,
        actual: Rational,
        expected: Rational,
    },
    #[error("assignment is not a bijection between agents and rooms")]
    NotABijection,
    #[error("price vector sums to {actual}, expected {expected}")]
    BudgetImbalance {
        actual: Rational,
        expected: Rational,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("instance too large for exhaustive enumeration: n = {0}")]
    InstanceTooLarge(usize),
    #[error("assignment is not welfare-maximizing; no envy-free prices exist for it")]
    NotWelfareMaximizing,
    #[error("Fourier-Motzkin elimination supports at most {max} variables, got {got}")]
    TooManyVariables { got: usize, max: usize },
    #[error("template cannot be completed: {0}")]
    InfeasibleTemplate(String),
    #[error("search space has {count} candidates, budget is {budget}")]
    SearchSpaceTooLarge { count: u128, budget: u128 },
    #[error("invalid search step {0}: must be positive and divide the total rent")]
    InvalidStep(Rational),
    #[error("unknown {kind} {label:?}")]
    UnknownLabel { kind: &'static str, label: String },
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("scenario has no expected outcome")]
    MissingExpected,
    #[error("linear program unexpectedly {0}")]
    Solver(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
