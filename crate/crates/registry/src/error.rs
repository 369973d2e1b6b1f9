use causalbench_core::model::Violation;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("name `{0}` is already registered; publish a new version instead")]
    NameTaken(String),
    #[error("corrupt archive: {0}")]
    CorruptArchive(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("`{0}` is not owned by the caller")]
    NotOwner(String),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("unknown context `{0}`")]
    UnknownContext(String),
    #[error("unknown run `{0}`")]
    UnknownRun(String),
    #[error("run fails validation ({} violations)", .0.len())]
    InvalidRun(Vec<Violation>),
    #[error("registrar unavailable: {0}")]
    RegistrarUnavailable(String),
    #[error("`{0}` is permanent and cannot be removed")]
    PermanentEntity(String),
    #[error("not visible to the caller: {0}")]
    Forbidden(String),
    #[error("stored bytes for `{0}` do not match their recorded hash")]
    IntegrityFailure(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("unknown or inactive API key")]
    Unauthenticated,
    #[error("storage error: {0}")]
    Storage(String),
}

impl RegistryError {
    /// Stable snake_case code used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            RegistryError::NameTaken(_) => "name_taken",
            RegistryError::CorruptArchive(_) => "corrupt_archive",
            RegistryError::SchemaViolation(_) => "schema_violation",
            RegistryError::NotOwner(_) => "not_owner",
            RegistryError::UnknownComponent(_) => "unknown_component",
            RegistryError::UnknownContext(_) => "unknown_context",
            RegistryError::UnknownRun(_) => "unknown_run",
            RegistryError::InvalidRun(_) => "invalid_run",
            RegistryError::RegistrarUnavailable(_) => "registrar_unavailable",
            RegistryError::PermanentEntity(_) => "permanent_entity",
            RegistryError::Forbidden(_) => "forbidden",
            RegistryError::IntegrityFailure(_) => "integrity_failure",
            RegistryError::Conflict(_) => "conflict",
            RegistryError::Unauthenticated => "unauthenticated",
            RegistryError::Storage(_) => "storage",
        }
    }
}

impl From<rusqlite::Error> for RegistryError {
    fn from(e: rusqlite::Error) -> Self {
        RegistryError::Storage(e.to_string())
    }
}

impl From<std::io::Error> for RegistryError {
    fn from(e: std::io::Error) -> Self {
        RegistryError::Storage(e.to_string())
    }
}

impl From<serde_json::Error> for RegistryError {
    fn from(e: serde_json::Error) -> Self {
        RegistryError::Storage(e.to_string())
    }
}

pub type Result<T, E = RegistryError> = std::result::Result<T, E>;
