use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use causalbench_registry::Principal;

use crate::error::{ApiError, ApiResult};
use crate::AppState;

/// The authenticated caller, if a key was presented. A present but invalid
/// key is rejected outright rather than treated as anonymous.
#[derive(Debug, Clone)]
pub struct Caller(pub Option<Principal>);

impl Caller {
    pub fn name(&self) -> Option<&str> {
        self.0.as_ref().map(|p| p.user_name.as_str())
    }

    /// The caller's user name, or 401.
    pub fn require(&self) -> ApiResult<String> {
        self.name().map(str::to_owned).ok_or_else(ApiError::unauthenticated)
    }
}

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let Some(value) = parts.headers.get(AUTHORIZATION) else { return Ok(Caller(None)) };
        let key = value
            .to_str()
            .ok()
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(|k| k.trim().to_owned())
            .filter(|k| !k.is_empty())
            .ok_or_else(ApiError::unauthenticated)?;
        let registry = state.registry.clone();
        let principal = crate::routes::blocking(move || Ok(registry.authenticate(&key)?)).await?;
        Ok(Caller(Some(principal)))
    }
}
