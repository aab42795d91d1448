use alloc::string::String;
use core::fmt;

/// Errors shared by the model, condition, solver and monitor layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation (negative
    /// density, exponent below one, sample box touching zero, ...).
    Domain(String),
    /// A weighted matrix was requested at a state with a vanishing
    /// component; callers must clamp at a positivity floor first.
    SingularWeight { species: usize },
    /// The model does not carry the data the operation needs
    /// (wrong species count, missing derivative evaluator, missing
    /// Lotka-Volterra table).
    Capability(String),
    /// Malformed input to an aggregation (too few samples, empty series).
    InvalidInput(String),
    /// An iterative linear solve failed to converge.
    SolverFailure(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::SingularWeight { species } => {
                write!(f, "singular weight: u_{species} vanishes; clamp at a positivity floor")
            }
            Error::Capability(msg) => write!(f, "capability error: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::SolverFailure(msg) => write!(f, "linear solver failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
