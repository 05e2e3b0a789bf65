use thiserror::Error;

use crate::env::NodePath;

/// Errors raised by environment generation, the analytic oracles and the
/// simulators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamma function pole at {0}")]
    Pole(f64),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("node {0} is not stored in the environment")]
    PathNotFound(NodePath),

    #[error("level mismatch: {0}")]
    LevelMismatch(String),

    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("requested value {requested} lies beyond the simulated horizon {available}")]
    HorizonExceeded { requested: f64, available: f64 },

    #[error("parent trajectory gap at time {0}")]
    ParentGap(f64),

    #[error("coupling plan violation: {0}")]
    Coupling(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
