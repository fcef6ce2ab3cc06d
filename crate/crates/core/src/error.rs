use thiserror::Error;

/// Errors raised by the model, simulator and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the range a model is valid for.
    #[error("{quantity} = {value} is outside the valid range {range}")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        range: &'static str,
    },

    /// An input violates a mathematical precondition (log of a non-positive
    /// distance, water content of one, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Caller broke an API contract (mixed spreading factors in one collision
    /// domain, active time longer than the reporting period, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "calibration infeasible: target {target_years} y not bracketed \
         (overhead 0 J -> {at_zero}, overhead {upper_j} J -> {at_upper})"
    )]
    CalibrationInfeasible {
        target_years: f64,
        at_zero: String,
        upper_j: f64,
        at_upper: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
