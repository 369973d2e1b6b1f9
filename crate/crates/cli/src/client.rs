//! Blocking client for the `/v1` API.

use std::time::Duration;

use causalbench_core::canonical;
use causalbench_core::model::{ComponentId, Descriptor};
use causalbench_harness::ComponentSource;
use causalbench_registry::ComponentRecord;
use causalbench_server::wire::{ErrorBody, PAYLOAD_HASH_HEADER};
use serde::de::DeserializeOwned;
use serde::Serialize;
use ureq::http::Response;

use crate::config::CliConfig;
use crate::error::{usage, CliError, Result};

const MAX_RESPONSE_BYTES: u64 = 1 << 30;

pub struct Client {
    base: String,
    key: String,
    agent: ureq::Agent,
}

/// A successful response.
pub struct Reply {
    pub status: u16,
    pub body: Vec<u8>,
    pub payload_hash: Option<String>,
}

impl Reply {
    pub fn json<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_slice(&self.body).map_err(|e| CliError::Transport(format!("unexpected response body: {e}")))
    }
}

/// `/v1/components/<name>/<version>`
pub fn component_path(id: &ComponentId) -> String {
    format!("/v1/components/{}/{}", id.name(), id.version())
}

/// `path?k=v&...`, skipping absent values.
pub fn with_query(path: &str, pairs: &[(&str, Option<String>)]) -> String {
    let mut q = url::form_urlencoded::Serializer::new(String::new());
    for (k, v) in pairs {
        if let Some(v) = v {
            q.append_pair(k, v);
        }
    }
    let q = q.finish();
    if q.is_empty() {
        path.to_string()
    } else {
        format!("{path}?{q}")
    }
}

impl Client {
    pub fn new(config: &CliConfig) -> Client {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(600)))
            .build()
            .into();
        Client {
            base: config.server_url.as_str().trim_end_matches('/').to_string(),
            key: config.api_key.clone(),
            agent,
        }
    }

    /// Fails early for commands that cannot work anonymously.
    pub fn require_key(&self) -> Result<()> {
        if self.key.is_empty() {
            return Err(usage(format!("this command needs an api_key in the config file or {}", crate::config::API_KEY_ENV)));
        }
        Ok(())
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn auth<B>(&self, rb: ureq::RequestBuilder<B>) -> ureq::RequestBuilder<B> {
        if self.key.is_empty() {
            rb
        } else {
            rb.header("Authorization", &format!("Bearer {}", self.key))
        }
    }

    fn finish(&self, r: std::result::Result<Response<ureq::Body>, ureq::Error>) -> Result<Reply> {
        let mut r = r.map_err(|e| CliError::Transport(format!("{}: {e}", self.base)))?;
        let status = r.status().as_u16();
        let payload_hash =
            r.headers().get(PAYLOAD_HASH_HEADER).and_then(|v| v.to_str().ok()).map(str::to_string);
        let body = r
            .body_mut()
            .with_config()
            .limit(MAX_RESPONSE_BYTES)
            .read_to_vec()
            .map_err(|e| CliError::Transport(e.to_string()))?;
        if status >= 400 {
            return Err(match serde_json::from_slice::<ErrorBody>(&body) {
                Ok(e) => CliError::Api { status, code: e.error, detail: e.detail, violations: e.violations },
                Err(_) => CliError::Transport(format!("HTTP {status}: {}", String::from_utf8_lossy(&body))),
            });
        }
        Ok(Reply { status, body, payload_hash })
    }

    pub fn get(&self, path: &str) -> Result<Reply> {
        self.finish(self.auth(self.agent.get(&self.url(path))).call())
    }

    pub fn get_json<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        self.get(path)?.json()
    }

    pub fn post_bytes(&self, path: &str, bytes: &[u8], content_type: &str) -> Result<Reply> {
        let rb = self.auth(self.agent.post(&self.url(path))).header("Content-Type", content_type);
        self.finish(rb.send(bytes))
    }

    pub fn post_json<B: Serialize + ?Sized>(&self, path: &str, body: &B) -> Result<Reply> {
        let bytes = canonical::to_vec(body).map_err(|e| usage(e.to_string()))?;
        self.post_bytes(path, &bytes, "application/json")
    }

    pub fn post_empty(&self, path: &str) -> Result<Reply> {
        self.finish(self.auth(self.agent.post(&self.url(path))).send_empty())
    }

    pub fn delete(&self, path: &str) -> Result<Reply> {
        self.finish(self.auth(self.agent.delete(&self.url(path))).call())
    }

    /// The component's record and its verified archive bytes.
    pub fn download(&self, id: &ComponentId) -> Result<(ComponentRecord, Vec<u8>)> {
        let record: ComponentRecord = self.get_json(&component_path(id))?;
        let reply = self.get(&format!("{}/payload", component_path(id)))?;
        let hash = canonical::sha256_hex(&reply.body);
        if hash != record.payload_hash || reply.payload_hash.as_deref().is_some_and(|h| h != hash) {
            return Err(CliError::Transport(format!("payload of {id} does not match its recorded hash")));
        }
        Ok((record, reply.body))
    }
}

/// Components fetched from the server for local execution.
pub struct HttpSource<'a>(pub &'a Client);

impl ComponentSource for HttpSource<'_> {
    fn fetch(&self, id: &ComponentId) -> std::result::Result<(Descriptor, Vec<u8>), String> {
        let (record, bytes) = self.0.download(id).map_err(|e| e.to_string())?;
        Ok((record.descriptor, bytes))
    }
}
