use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use causalbench_core::analysis::AnalysisError;
use causalbench_core::model::Violation;
use causalbench_registry::RegistryError;

use crate::wire::{canonical_response, ErrorBody};

/// An error response: status plus the `{error, detail}` body.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub detail: String,
    pub violations: Vec<Violation>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, detail: impl Into<String>) -> Self {
        ApiError { status, code, detail: detail.into(), violations: Vec::new() }
    }

    pub fn schema(detail: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "schema_violation", detail)
    }

    pub fn unauthenticated() -> Self {
        ApiError::from(RegistryError::Unauthenticated)
    }

    pub fn not_found(detail: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", detail)
    }

    pub fn internal(detail: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", detail)
    }
}

pub fn status_of(e: &RegistryError) -> StatusCode {
    match e {
        RegistryError::Unauthenticated => StatusCode::UNAUTHORIZED,
        RegistryError::Forbidden(_) | RegistryError::NotOwner(_) => StatusCode::FORBIDDEN,
        RegistryError::UnknownComponent(_) | RegistryError::UnknownContext(_) | RegistryError::UnknownRun(_) => {
            StatusCode::NOT_FOUND
        }
        RegistryError::NameTaken(_) | RegistryError::PermanentEntity(_) | RegistryError::Conflict(_) => {
            StatusCode::CONFLICT
        }
        RegistryError::SchemaViolation(_) | RegistryError::InvalidRun(_) | RegistryError::CorruptArchive(_) => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        RegistryError::RegistrarUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
        RegistryError::IntegrityFailure(_) | RegistryError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        let mut out = ApiError::new(status_of(&e), e.code(), e.to_string());
        if let RegistryError::InvalidRun(v) = e {
            out.violations = v;
        }
        out
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "analysis_failed", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(code = self.code, detail = %self.detail, "request failed");
        }
        let body = ErrorBody { error: self.code.to_string(), detail: self.detail, violations: self.violations };
        canonical_response(self.status, &body)
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
