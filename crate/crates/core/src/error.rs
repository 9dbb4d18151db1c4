use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("wrong placement: {0}")]
    WrongPlacement(String),

    #[error("search budget exceeded: need about {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("not decodable: {0}")]
    NotDecodable(String),

    #[error("numerically singular system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("inconsistent products: {0}")]
    Inconsistent(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
