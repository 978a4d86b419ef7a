use thiserror::Error;

use crate::quad::Estimate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what}: query at r = {r} is outside the table range [{min}, {max}]")]
    OutOfTable {
        what: &'static str,
        r: f64,
        min: f64,
        max: f64,
    },

    #[error("{what}: tolerance {target:e} not reached (achieved {:e} on value {:e})", achieved.error, achieved.value)]
    Tolerance {
        what: String,
        target: f64,
        achieved: Estimate,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("linear solve failed: {0}")]
    Solver(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn tolerance(what: impl Into<String>, target: f64, achieved: Estimate) -> Self {
        Error::Tolerance {
            what: what.into(),
            target,
            achieved,
        }
    }
}
