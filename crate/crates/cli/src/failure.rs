use std::fmt;

use varorder::Error;

/// Run failures, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or arguments (status 2).
    Config(String),
    /// A quantity could not be computed to the requested accuracy (status 3).
    Tolerance(String),
    /// Computed, but an asserted property does not hold (status 4).
    Property(String),
    /// File system trouble (status 1).
    Io(String),
}

impl Failure {
    pub fn status(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Tolerance(_) => 3,
            Failure::Property(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Tolerance(m) => write!(f, "tolerance failure: {m}"),
            Failure::Property(m) => write!(f, "property failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::OutOfTable { .. } => Failure::Config(e.to_string()),
            Error::Tolerance { .. } | Error::Solver(_) => Failure::Tolerance(e.to_string()),
            Error::Verification(_) => Failure::Property(e.to_string()),
        }
    }
}
