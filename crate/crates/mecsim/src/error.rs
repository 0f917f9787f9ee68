use crate::numeric::NumericError;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("scenario infeasible: {0}")]
    ScenarioInfeasible(String),
    #[error("capacity budget infeasible: minimum demand {required:.6e} exceeds budget {budget:.6e}")]
    BudgetInfeasible { required: f64, budget: f64 },
    #[error("users feasible neither locally nor offloaded: {0:?}")]
    InfeasibleUsers(Vec<usize>),
    #[error("user infeasible in both branches")]
    UserInfeasible,
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
