use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the estimators, integrators and report builders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("interval ({i}, {j}) out of range for grid of {n} nodes")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("invalid interval family: {0}")]
    InvalidFamily(String),

    #[error("interval family is empty")]
    EmptyFamily,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("weight sample {index} is not positive ({value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("unknown field id `{0}`")]
    UnknownField(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("unknown expression `{0}`")]
    UnknownExpression(String),

    #[error("field evaluation failed at t = {t}, x = {x}: {reason}")]
    FieldEval { t: f64, x: f64, reason: String },

    #[error("step size underflow at t = {t} for trajectory starting at x = {x}")]
    StepUnderflow { t: f64, x: f64 },

    #[error("flow map lost strict monotonicity at time {t} between nodes {index} and {next}", next = .index + 1)]
    NotMonotone { t: f64, index: usize },

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("characteristic left the grid at t = {t} (seed {seed})")]
    LeftGrid { t: f64, seed: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
