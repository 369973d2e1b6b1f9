//! Clients that mint public identifiers for published subjects.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use causalbench_core::canonical;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegistrarKind {
    LocalSim,
    ZenodoSandbox,
}

impl RegistrarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegistrarKind::LocalSim => "local-sim",
            RegistrarKind::ZenodoSandbox => "zenodo-sandbox",
        }
    }

    pub fn parse(s: &str) -> Option<RegistrarKind> {
        match s {
            "local-sim" | "sim" => Some(RegistrarKind::LocalSim),
            "zenodo-sandbox" => Some(RegistrarKind::ZenodoSandbox),
            _ => None,
        }
    }
}

/// What the registrar is told about the subject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MintRequest {
    /// Store-wide subject key, e.g. `run:<id>` or `component:<name>@<v>`.
    pub subject: String,
    pub title: String,
    pub description: String,
    pub creators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct RegistrarError(pub String);

pub trait Registrar: Send + Sync {
    fn kind(&self) -> RegistrarKind;
    fn mint(&self, request: &MintRequest) -> Result<String, RegistrarError>;
}

impl<T: Registrar + ?Sized> Registrar for std::sync::Arc<T> {
    fn kind(&self) -> RegistrarKind {
        (**self).kind()
    }

    fn mint(&self, request: &MintRequest) -> Result<String, RegistrarError> {
        (**self).mint(request)
    }
}

/// Deterministic offline registrar: `10.70000/cb.` followed by the first
/// 12 hex digits of the subject's SHA-256.
#[derive(Debug, Default)]
pub struct LocalSim {
    down: AtomicBool,
}

pub const LOCAL_SIM_PREFIX: &str = "10.70000/cb.";

impl LocalSim {
    pub fn new() -> Self {
        LocalSim::default()
    }

    /// Simulates an outage; every mint fails while set.
    pub fn set_down(&self, down: bool) {
        self.down.store(down, Ordering::SeqCst);
    }

    pub fn identifier_for(subject: &str) -> String {
        format!("{LOCAL_SIM_PREFIX}{}", &canonical::sha256_hex(subject.as_bytes())[..12])
    }
}

impl Registrar for LocalSim {
    fn kind(&self) -> RegistrarKind {
        RegistrarKind::LocalSim
    }

    fn mint(&self, request: &MintRequest) -> Result<String, RegistrarError> {
        if self.down.load(Ordering::SeqCst) {
            return Err(RegistrarError("local registrar is down".into()));
        }
        Ok(LocalSim::identifier_for(&request.subject))
    }
}

/// Client for the Zenodo sandbox deposition API. Creating a deposition
/// reserves a DOI, which is returned as the identifier.
pub struct ZenodoSandbox {
    base_url: String,
    token: String,
    agent: ureq::Agent,
}

pub const ZENODO_SANDBOX_URL: &str = "https://sandbox.zenodo.org/api";

#[derive(Serialize)]
struct Creator<'a> {
    name: &'a str,
}

#[derive(Serialize)]
struct DepositionMetadata<'a> {
    title: &'a str,
    upload_type: &'static str,
    description: &'a str,
    creators: Vec<Creator<'a>>,
    prereserve_doi: bool,
}

#[derive(Serialize)]
struct DepositionRequest<'a> {
    metadata: DepositionMetadata<'a>,
}

#[derive(Deserialize)]
struct PrereservedDoi {
    doi: String,
}

#[derive(Deserialize)]
struct ResponseMetadata {
    prereserve_doi: PrereservedDoi,
}

#[derive(Deserialize)]
struct DepositionResponse {
    metadata: ResponseMetadata,
}

impl ZenodoSandbox {
    pub fn new(base_url: impl Into<String>, token: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        ZenodoSandbox { base_url: base_url.into(), token: token.into(), agent }
    }

    /// Reads `CB_ZENODO_TOKEN` and, optionally, `CB_ZENODO_URL`.
    pub fn from_env() -> Result<Self, RegistrarError> {
        let token = std::env::var("CB_ZENODO_TOKEN")
            .map_err(|_| RegistrarError("CB_ZENODO_TOKEN is not set".into()))?;
        let url = std::env::var("CB_ZENODO_URL").unwrap_or_else(|_| ZENODO_SANDBOX_URL.to_string());
        Ok(ZenodoSandbox::new(url, token))
    }
}

impl Registrar for ZenodoSandbox {
    fn kind(&self) -> RegistrarKind {
        RegistrarKind::ZenodoSandbox
    }

    fn mint(&self, request: &MintRequest) -> Result<String, RegistrarError> {
        let body = DepositionRequest {
            metadata: DepositionMetadata {
                title: &request.title,
                upload_type: "other",
                description: &request.description,
                creators: request.creators.iter().map(|c| Creator { name: c }).collect(),
                prereserve_doi: true,
            },
        };
        let url = format!("{}/deposit/depositions", self.base_url.trim_end_matches('/'));
        let response: DepositionResponse = self
            .agent
            .post(&url)
            .header("Authorization", &format!("Bearer {}", self.token))
            .send_json(&body)
            .map_err(|e| RegistrarError(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| RegistrarError(e.to_string()))?;
        Ok(response.metadata.prereserve_doi.doi)
    }
}
