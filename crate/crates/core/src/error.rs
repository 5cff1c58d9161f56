use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("weight table exhausted at index {index}: tail bound {bound:e} still above tolerance {tol:e}")]
    TableExhausted { index: usize, bound: f64, tol: f64 },

    #[error("weight table too short: {0}")]
    TableTooShort(String),

    #[error("quadrature on [{a}, {b}] did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, tol: f64, estimate: f64 },

    #[error("derivative order {requested} exceeds certified maximum {max}")]
    OrderOverflow { requested: usize, max: usize },

    #[error("inconsistent structural data: {0}")]
    Inconsistent(String),

    #[error("missing structural data: {0}")]
    Missing(&'static str),

    #[error("cannot parse slowly varying spec `{spec}`: {reason}")]
    SvfSpec { spec: String, reason: String },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
