use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside the domain {domain}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value while evaluating {what} at {at}")]
    NonFinite { what: &'static str, at: f64 },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("empty domain ({lo}, {hi})")]
    EmptyDomain { lo: f64, hi: f64 },

    #[error("{what} did not converge (estimate {estimate}, error {error})")]
    NotConverged {
        what: &'static str,
        estimate: f64,
        error: f64,
    },

    #[error("profile `{profile}` fails {condition}")]
    Validation { profile: String, condition: String },

    #[error("profile `{0}` is not parametrised by the Korányi argument")]
    NotArgumentParametrised(String),

    #[error("curve is not horizontal: residual {residual} exceeds {tolerance}")]
    NotHorizontal { residual: f64, tolerance: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("horizontal mean curvature is indeterminate at s = {s} (one-sided values {left}, {right})")]
    IndeterminateCurvature { s: f64, left: f64, right: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
