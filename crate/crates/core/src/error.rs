use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("length error: expected {expected} values, found {found}")]
    Length { expected: usize, found: usize },

    #[error("value {value} at index {index} is outside [0, 1]")]
    Range { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input carries no usable contrast (e.g. identical acquisitions).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Pseudo-labels or training labels contain a single class.
    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    #[error("kappa undefined: expected agreement equals 1")]
    UndefinedKappa,

    #[error("invalid scene spec: {0}")]
    Spec(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
