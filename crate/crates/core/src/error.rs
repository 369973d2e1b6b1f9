use thiserror::Error;

/// Errors raised by the data model and its set algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("empty family: {0}")]
    EmptyFamily(String),
    #[error("invalid component id `{0}`")]
    InvalidId(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
}
