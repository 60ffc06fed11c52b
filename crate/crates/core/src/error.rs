use thiserror::Error;

/// Errors raised by the valuation, welfare, sketch, protocol and mechanism layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} items, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("item {item} is out of range for {m} items")]
    ItemOutOfRange { item: usize, m: usize },

    #[error("clause values must be finite and non-negative, found {0}")]
    InvalidValue(f64),

    #[error("a valuation needs at least one clause")]
    EmptyValuation,

    #[error("{0} requires binary clauses")]
    NotBinary(&'static str),

    #[error("{what} needs {needed} evaluations but the budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid report: {0}")]
    InvalidReport(String),

    #[error("decision mode needs a decision spec")]
    MissingDecisionSpec,

    #[error("malformed instance: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
