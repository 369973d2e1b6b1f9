use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use causalbench_core::model::{BenchmarkContext, BenchmarkRun, ComponentId};
use causalbench_registry::{ComponentQuery, RunQuery};
use serde::de::DeserializeOwned;

use crate::auth::Caller;
use crate::error::{ApiError, ApiResult};
use crate::wire::{created, ok, Health, RunCreated, WhoAmI, ARCHIVE_CONTENT_TYPE, PAYLOAD_HASH_HEADER};
use crate::AppState;

/// Runs registry work off the async executor.
pub(crate) async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))?
}

pub(crate) fn body(b: Result<Bytes, BytesRejection>) -> ApiResult<Bytes> {
    b.map_err(|e| {
        let code = if e.status() == StatusCode::PAYLOAD_TOO_LARGE { "payload_too_large" } else { "bad_request" };
        ApiError::new(e.status(), code, e.body_text())
    })
}

pub(crate) fn json<T: DeserializeOwned>(b: Result<Bytes, BytesRejection>) -> ApiResult<T> {
    let bytes = body(b)?;
    serde_json::from_slice(&bytes).map_err(|e| ApiError::schema(format!("request body: {e}")))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(t)| t).map_err(|e| ApiError::schema(e.body_text()))
}

fn path<T>(p: Result<Path<T>, PathRejection>) -> ApiResult<T> {
    p.map(|Path(t)| t).map_err(|e| ApiError::schema(e.body_text()))
}

fn component_id(p: Result<Path<(String, String, String)>, PathRejection>) -> ApiResult<ComponentId> {
    let (owner, slug, ver) = path(p)?;
    let version: u32 = ver.parse().map_err(|_| ApiError::schema(format!("invalid version `{ver}`")))?;
    ComponentId::new(format!("{owner}/{slug}"), version).map_err(|e| ApiError::schema(e.to_string()))
}

pub async fn not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

pub async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this endpoint")
}

pub async fn health(State(s): State<AppState>) -> impl IntoResponse {
    ok(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        registrar: s.registry.registrar_kind(),
    })
}

pub async fn whoami(caller: Caller) -> ApiResult<impl IntoResponse> {
    Ok(ok(WhoAmI { user_name: caller.require()? }))
}

// ---- components ----

pub async fn register(
    State(s): State<AppState>,
    caller: Caller,
    b: Result<Bytes, BytesRejection>,
) -> ApiResult<impl IntoResponse> {
    let who = caller.require()?;
    let bytes = body(b)?;
    let record = blocking(move || Ok(s.registry.register(&bytes, &who)?)).await?;
    Ok(created(record))
}

pub async fn new_version(
    State(s): State<AppState>,
    caller: Caller,
    p: Result<Path<(String, String)>, PathRejection>,
    b: Result<Bytes, BytesRejection>,
) -> ApiResult<impl IntoResponse> {
    let who = caller.require()?;
    let (owner, slug) = path(p)?;
    let bytes = body(b)?;
    let record = blocking(move || Ok(s.registry.new_version(&format!("{owner}/{slug}"), &bytes, &who)?)).await?;
    Ok(created(record))
}

pub async fn list_components(
    State(s): State<AppState>,
    caller: Caller,
    q: Result<Query<ComponentQuery>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let q = query(q)?;
    let page = blocking(move || Ok(s.registry.query(&q, caller.name())?)).await?;
    Ok(ok(page))
}

pub async fn get_component(
    State(s): State<AppState>,
    caller: Caller,
    p: Result<Path<(String, String, String)>, PathRejection>,
) -> ApiResult<impl IntoResponse> {
    let id = component_id(p)?;
    let record = blocking(move || Ok(s.registry.record(&id, caller.name())?)).await?;
    Ok(ok(record))
}

pub async fn download_payload(
    State(s): State<AppState>,
    caller: Caller,
    p: Result<Path<(String, String, String)>, PathRejection>,
) -> ApiResult<Response> {
    let id = component_id(p)?;
    let (record, bytes) = blocking(move || Ok(s.registry.fetch(&id, caller.name())?)).await?;
    let mut r = (StatusCode::OK, bytes).into_response();
    let h = r.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static(ARCHIVE_CONTENT_TYPE));
    if let Ok(v) = HeaderValue::from_str(&record.payload_hash) {
        h.insert(PAYLOAD_HASH_HEADER, v);
    }
    Ok(r)
}

pub async fn repair_payload(
    State(s): State<AppState>,
    caller: Caller,
    p: Result<Path<(String, String, String)>, PathRejection>,
    b: Result<Bytes, BytesRejection>,
) -> ApiResult<StatusCode> {
    let who = caller.require()?;
    let id = component_id(p)?;
    let bytes = body(b)?;
    blocking(move || Ok(s.registry.repair_payload(&id, &bytes, &who)?)).await?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn delete_component(
    State(s): State<AppState>,
    caller: Caller,
    p: Result<Path<(String, String, String)>, PathRejection>,
) -> ApiResult<StatusCode> {
    let who = caller.require()?;
    let id = component_id(p)?;
    blocking(move || Ok(s.registry.delete_component(&id, &who)?)).await?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn publish_component(
    State(s): State<AppState>,
    caller: Caller,
    p: Result<Path<(String, String, String)>, PathRejection>,
) -> ApiResult<impl IntoResponse> {
    let who = caller.require()?;
    let id = component_id(p)?;
    let publication = blocking(move || Ok(s.registry.publish_component(&id, &who)?)).await?;
    Ok(ok(publication))
}

// ---- contexts ----

pub async fn put_context(
    State(s): State<AppState>,
    caller: Caller,
    b: Result<Bytes, BytesRejection>,
) -> ApiResult<impl IntoResponse> {
    let who = caller.require()?;
    let context: BenchmarkContext = json(b)?;
    let context = blocking(move || {
        s.registry.put_context(&context, &who)?;
        Ok(context)
    })
    .await?;
    Ok(created(context))
}

pub async fn get_context(
    State(s): State<AppState>,
    p: Result<Path<String>, PathRejection>,
) -> ApiResult<impl IntoResponse> {
    let id = path(p)?;
    let context = blocking(move || Ok(s.registry.context(&id)?)).await?;
    Ok(ok(context))
}

// ---- runs ----

pub async fn put_run(
    State(s): State<AppState>,
    caller: Caller,
    b: Result<Bytes, BytesRejection>,
) -> ApiResult<impl IntoResponse> {
    let who = caller.require()?;
    let run: BenchmarkRun = json(b)?;
    let run_id = blocking(move || {
        s.registry.put_run(&run, &who)?;
        Ok(run.run_id)
    })
    .await?;
    Ok(created(RunCreated { run_id }))
}

pub async fn list_runs(
    State(s): State<AppState>,
    caller: Caller,
    q: Result<Query<RunQuery>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let q = query(q)?;
    let page = blocking(move || Ok(s.registry.query_runs(&q, caller.name())?)).await?;
    Ok(ok(page))
}

pub async fn get_run(
    State(s): State<AppState>,
    caller: Caller,
    p: Result<Path<String>, PathRejection>,
) -> ApiResult<impl IntoResponse> {
    let id = path(p)?;
    let run = blocking(move || Ok(s.registry.run(&id, caller.name())?)).await?;
    Ok(ok(run))
}

pub async fn publish_run(
    State(s): State<AppState>,
    caller: Caller,
    p: Result<Path<String>, PathRejection>,
) -> ApiResult<impl IntoResponse> {
    let who = caller.require()?;
    let id = path(p)?;
    let publication = blocking(move || Ok(s.registry.publish_run(&id, &who)?)).await?;
    Ok(ok(publication))
}

pub async fn delete_run(
    State(s): State<AppState>,
    caller: Caller,
    p: Result<Path<String>, PathRejection>,
) -> ApiResult<StatusCode> {
    let who = caller.require()?;
    let id = path(p)?;
    blocking(move || Ok(s.registry.delete_run(&id, &who)?)).await?;
    Ok(StatusCode::NO_CONTENT)
}
