use thiserror::Error;

use crate::ct::CtEstimatorState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension { context: &'static str, expected: String, found: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A tuning constant violates its admissible range. `bound` names the constraint.
    #[error("invalid {name} = {value}: requires {bound}")]
    InvalidGain { name: &'static str, bound: &'static str, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration blew up at t = {time}")]
    IntegrationBlowup { time: f64, last_valid: Box<CtEstimatorState> },

    #[error("gain matrix lost positive definiteness at step {step}")]
    LostDefiniteness { step: u64 },

    #[error("normalization m = {0} is not positive")]
    Normalization(f64),

    #[error("invalid switching schedule: {0}")]
    Schedule(String),

    #[error("desired poles are not closed under conjugation (imaginary residue {0:e})")]
    Conjugation(f64),

    #[error("unknown check suite `{0}`")]
    UnknownSuite(String),

    #[error("failed to parse configuration at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension { context, expected: expected.to_string(), found: found.to_string() }
    }
}
