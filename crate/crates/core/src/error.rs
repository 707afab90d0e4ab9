use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a precondition (bad polynomial, singular matrix, ...).
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A geometric object failed its defining axioms.
    #[error("validation failed: {0}")]
    Validation(String),
    /// The request is outside what this build supports (q, h, seeded data).
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Objects built over different fields were combined.
    #[error("objects live over different fields")]
    FieldMismatch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
