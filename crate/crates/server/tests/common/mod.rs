#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use causalbench_core::canonical;
use causalbench_core::model::*;
use causalbench_registry::archive::{pack, Manifest, ManifestMetadata};
use causalbench_registry::{LocalSim, Registry};
use tower::ServiceExt;

pub struct Response {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Response {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

/// A registry plus the router over it, driven in-process.
pub struct App {
    pub dir: tempfile::TempDir,
    pub registry: Arc<Registry>,
    pub sim: Arc<LocalSim>,
    pub router: Router,
    rt: tokio::runtime::Runtime,
}

impl App {
    pub fn new() -> App {
        let dir = tempfile::tempdir().unwrap();
        let sim = Arc::new(LocalSim::new());
        let registry = Arc::new(Registry::open(dir.path(), Box::new(sim.clone())).unwrap());
        let router = causalbench_server::router(registry.clone());
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        App { dir, registry, sim, router, rt }
    }

    pub fn key(&self, user: &str) -> String {
        self.registry.issue_key(user).unwrap()
    }

    pub fn send(&self, method: Method, uri: &str, key: Option<&str>, body: Vec<u8>) -> Response {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(k) = key {
            req = req.header("authorization", format!("Bearer {k}"));
        }
        let req = req.body(Body::from(body)).unwrap();
        self.rt.block_on(async {
            let r = self.router.clone().oneshot(req).await.unwrap();
            let status = r.status();
            let headers = r.headers().clone();
            let body = axum::body::to_bytes(r.into_body(), usize::MAX).await.unwrap().to_vec();
            Response { status, headers, body }
        })
    }

    pub fn get(&self, uri: &str, key: Option<&str>) -> Response {
        self.send(Method::GET, uri, key, Vec::new())
    }

    pub fn post_json<T: serde::Serialize>(&self, uri: &str, key: Option<&str>, body: &T) -> Response {
        self.send(Method::POST, uri, key, canonical::to_vec(body).unwrap())
    }
}

pub fn id(s: &str) -> ComponentId {
    s.parse().unwrap()
}

/// `/v1/components/<owner>/<slug>/<version>`
pub fn component_path(id: &ComponentId) -> String {
    format!("/v1/components/{}/{}", id.name(), id.version())
}

fn meta(title: &str) -> ManifestMetadata {
    ManifestMetadata { title: title.into(), description: format!("{title} for tests"), license: "MIT".into() }
}

pub fn dataset(name: &str, nonce: &str) -> Vec<u8> {
    let files: BTreeMap<String, Vec<u8>> = [
        ("data.csv".to_string(), format!("x,y\n1,2\n# {nonce}\n").into_bytes()),
        ("graph.csv".to_string(), b"from,to\nx,y\n".to_vec()),
    ]
    .into();
    let descriptor = DatasetDescriptor {
        id: ComponentId::new(name, 1).unwrap(),
        files: files
            .iter()
            .map(|(n, b)| DatasetFile { name: n.clone(), content_hash: canonical::sha256_hex(b), byte_size: b.len() as u64 })
            .collect(),
        config: [("n_rows".to_string(), Scalar::Int(2))].into(),
        provided_ports: vec![
            PortSpec::required("data", DataRole::TabularObservations),
            PortSpec::required("graph", DataRole::CausalGraph),
        ],
    };
    pack(&Manifest::new(Descriptor::Dataset(descriptor), meta(name)), &files).unwrap()
}

pub fn model(name: &str, nonce: &str) -> Vec<u8> {
    let descriptor = ModelDescriptor {
        id: ComponentId::new(name, 1).unwrap(),
        signature: SignatureSpec {
            task: TaskKind::CausalDiscovery,
            inputs: vec![PortSpec::required("data", DataRole::TabularObservations)],
            outputs: vec![PortSpec::required("graph_pred", DataRole::CausalGraph)],
        },
        entrypoint: "run.py".into(),
        hyperparameter_schema: BTreeMap::new(),
    };
    let files = [("run.py".to_string(), format!("# {nonce}\n").into_bytes())].into();
    pack(&Manifest::new(Descriptor::Model(descriptor), meta(name)), &files).unwrap()
}

/// A model needing an input no dataset here provides.
pub fn effects_model(name: &str) -> Vec<u8> {
    let descriptor = ModelDescriptor {
        id: ComponentId::new(name, 1).unwrap(),
        signature: SignatureSpec {
            task: TaskKind::CausalDiscovery,
            inputs: vec![PortSpec::required("effects", DataRole::TreatmentEffectEstimates)],
            outputs: vec![PortSpec::required("graph_pred", DataRole::CausalGraph)],
        },
        entrypoint: "run.py".into(),
        hyperparameter_schema: BTreeMap::new(),
    };
    let files = [("run.py".to_string(), b"\n".to_vec())].into();
    pack(&Manifest::new(Descriptor::Model(descriptor), meta(name)), &files).unwrap()
}

pub fn metric(name: &str, nonce: &str) -> Vec<u8> {
    let descriptor = MetricDescriptor {
        id: ComponentId::new(name, 1).unwrap(),
        signature: SignatureSpec {
            task: TaskKind::CausalDiscovery,
            inputs: vec![
                PortSpec::required("graph", DataRole::CausalGraph),
                PortSpec::required("graph_pred", DataRole::CausalGraph),
            ],
            outputs: vec![PortSpec::required("value", DataRole::Scalar)],
        },
        direction: MetricDirection::LowerBetter,
        entrypoint: "metric.py".into(),
    };
    let files = [("metric.py".to_string(), format!("# {nonce}\n").into_bytes())].into();
    pack(&Manifest::new(Descriptor::Metric(descriptor), meta(name)), &files).unwrap()
}
