//! Request and response bodies of the `/v1` API.
//!
//! Every JSON body is written in canonical form: object keys sorted, no
//! insignificant whitespace.

use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use causalbench_core::analysis::{
    Assignment, CausalGraph, Contrast, Coverage, Filter, Objective, RecommendRequest, RunTable, SliceSpec,
};
use causalbench_core::canonical;
use causalbench_core::model::{BenchmarkContext, ComponentId, Violation};
use causalbench_registry::RegistrarKind;
use serde::{Deserialize, Serialize};

pub const API_PREFIX: &str = "/v1";
pub const PAYLOAD_HASH_HEADER: &str = "x-payload-sha256";
pub const ARCHIVE_CONTENT_TYPE: &str = "application/gzip";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub registrar: RegistrarKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhoAmI {
    pub user_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCreated {
    pub run_id: String,
}

/// Component ids the caller has picked, and optionally the ids to classify.
/// Without `candidates`, every component visible to the caller is
/// classified.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestRequest {
    #[serde(default)]
    pub chosen: Vec<ComponentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<ComponentId>>,
}

/// Which recorded results an analysis works on.
///
/// With a context (inline or by id) the rows are the virtual run for that
/// context. Otherwise they come from the listed runs, or from every run the
/// caller can read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<BenchmarkContext>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_ids: Option<Vec<String>>,
    /// Defaults to the built-in factor/outcome graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<CausalGraph>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SliceRequest {
    #[serde(flatten)]
    pub source: RunSource,
    #[serde(flatten)]
    pub spec: SliceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactRequest {
    #[serde(flatten)]
    pub source: RunSource,
    pub treatment: Contrast,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRequest {
    #[serde(flatten)]
    pub source: RunSource,
    pub objectives: Vec<Objective>,
    /// Applied before the front is computed.
    #[serde(default)]
    pub filters: Vec<Filter>,
    /// Column naming each point; the row index when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoResult {
    /// Ids of the non-dominated rows, in table order.
    pub front: Vec<String>,
    /// The non-dominated rows themselves.
    pub table: RunTable,
    /// Rows left out because an objective value was missing.
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    #[serde(flatten)]
    pub source: RunSource,
    pub target: Assignment,
    /// Every numeric outcome when empty.
    #[serde(default)]
    pub outcomes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendBody {
    #[serde(flatten)]
    pub source: RunSource,
    #[serde(flatten)]
    pub request: RecommendRequest,
}

/// Envelope of every analysis response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResponse<T> {
    pub result: T,
    /// Rows of the table the analysis ran on.
    pub rows: usize,
    /// Present when the rows came from a virtual run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<Coverage>,
}

/// A canonical JSON response.
pub fn canonical_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match canonical::to_vec(body) {
        Ok(bytes) => {
            let mut r = (status, bytes).into_response();
            r.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
            r
        }
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

/// Wraps a body so handlers can return it directly.
pub struct Canonical<T>(pub StatusCode, pub T);

impl<T: Serialize> IntoResponse for Canonical<T> {
    fn into_response(self) -> Response {
        canonical_response(self.0, &self.1)
    }
}

pub fn ok<T: Serialize>(body: T) -> Canonical<T> {
    Canonical(StatusCode::OK, body)
}

pub fn created<T: Serialize>(body: T) -> Canonical<T> {
    Canonical(StatusCode::CREATED, body)
}
