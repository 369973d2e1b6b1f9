//! HTTP/JSON facade over the registry, the compatibility engine and the
//! analysis functions.
//!
//! All endpoints live under `/v1`. Writes need an `Authorization: Bearer
//! <key>` header; reads work without one and then see public entities only.
//! Every error carries `{"error": <code>, "detail": <text>}`.
//!
//! ```no_run
//! # async fn demo() -> std::io::Result<()> {
//! use std::sync::Arc;
//! use causalbench_registry::{LocalSim, Registry};
//!
//! let registry = Registry::open("/var/lib/causalbench", Box::new(LocalSim::new())).unwrap();
//! let app = causalbench_server::router(Arc::new(registry));
//! let listener = tokio::net::TcpListener::bind("127.0.0.1:8080").await?;
//! axum::serve(listener, app).await
//! # }
//! ```

mod analysis;
mod auth;
mod error;
mod routes;
pub mod wire;

use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use causalbench_registry::{LocalSim, Registrar, RegistrarKind, Registry, ZenodoSandbox};

pub use auth::Caller;
pub use error::{status_of, ApiError, ApiResult};

pub const STORE_DIR_ENV: &str = "CB_STORE_DIR";
pub const BIND_ADDR_ENV: &str = "CB_BIND_ADDR";
pub const REGISTRAR_ENV: &str = "CB_REGISTRAR";
pub const DEFAULT_BIND_ADDR: &str = "127.0.0.1:8080";
pub const MAX_BODY_BYTES: usize = 512 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    pub registry: Arc<Registry>,
}

/// The registrar named by `kind` (`sim` or `zenodo-sandbox`).
pub fn registrar_for(kind: &str) -> Result<Box<dyn Registrar>, String> {
    match RegistrarKind::parse(kind) {
        Some(RegistrarKind::LocalSim) => Ok(Box::new(LocalSim::new())),
        Some(RegistrarKind::ZenodoSandbox) => Ok(Box::new(ZenodoSandbox::from_env().map_err(|e| e.to_string())?)),
        None => Err(format!("unknown registrar `{kind}`; expected sim or zenodo-sandbox")),
    }
}

pub fn router(registry: Arc<Registry>) -> Router {
    use routes::*;
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/whoami", get(whoami))
        .route("/v1/components", post(register).get(list_components))
        .route("/v1/components/{owner}/{slug}/versions", post(new_version))
        .route("/v1/components/{owner}/{slug}/{ver}", get(get_component).delete(delete_component))
        .route("/v1/components/{owner}/{slug}/{ver}/payload", get(download_payload).put(repair_payload))
        .route("/v1/components/{owner}/{slug}/{ver}/publish", post(publish_component))
        .route("/v1/contexts", post(put_context))
        .route("/v1/contexts/{id}", get(get_context))
        .route("/v1/runs", post(put_run).get(list_runs))
        .route("/v1/runs/{id}", get(get_run).delete(delete_run))
        .route("/v1/runs/{id}/publish", post(publish_run))
        .route("/v1/compat/suggest", post(analysis::suggest))
        .route("/v1/analysis/slice", post(analysis::slice))
        .route("/v1/analysis/impact", post(analysis::impact))
        .route("/v1/analysis/pareto", post(analysis::pareto))
        .route("/v1/analysis/predict", post(analysis::predict))
        .route("/v1/analysis/recommend", post(analysis::recommend))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(AppState { registry })
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/api.md")]
pub mod book {}
