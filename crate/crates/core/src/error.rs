use thiserror::Error;

/// Errors produced by the solver, the oracles and the input parsers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("horizon must be at least 1, got {0}")]
    Horizon(usize),

    #[error("invalid cost: {0}")]
    Cost(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("values at positions {first} and {second} are tied")]
    Tie { first: usize, second: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("exact mode supports horizons up to {bound}, got {n}")]
    ExactModeBound { n: usize, bound: usize },

    #[error("cost {0} has no exact rational form; pass it as a decimal or p/q string")]
    InexactCost(f64),

    #[error("exhaustive oracle supports horizons up to {max}, got {n}")]
    OracleBound { n: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn index_err(msg: impl Into<String>) -> Error {
    Error::Index(msg.into())
}
