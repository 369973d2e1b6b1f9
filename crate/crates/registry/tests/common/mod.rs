#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use causalbench_core::canonical;
use causalbench_core::model::*;
use causalbench_registry::archive::{pack, Manifest, ManifestMetadata};
use causalbench_registry::{LocalSim, Registry};

pub fn open() -> (tempfile::TempDir, Registry, Arc<LocalSim>) {
    let dir = tempfile::tempdir().unwrap();
    let sim = Arc::new(LocalSim::new());
    let reg = Registry::open(dir.path(), Box::new(sim.clone())).unwrap();
    (dir, reg, sim)
}

pub fn id(s: &str) -> ComponentId {
    s.parse().unwrap()
}

fn meta(title: &str) -> ManifestMetadata {
    ManifestMetadata { title: title.into(), description: format!("{title} for tests"), license: "MIT".into() }
}

/// A dataset archive with `data.csv` and `graph.csv`; `nonce` varies the bytes.
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
        config: BTreeMap::new(),
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

/// Registers one dataset, model and metric for `owner` and returns a
/// context over them.
pub fn trio(reg: &Registry, owner: &str, context_id: &str) -> BenchmarkContext {
    let d = reg.register(&dataset(&format!("{owner}/scm"), context_id), owner).unwrap();
    let m = reg.register(&model(&format!("{owner}/pc"), context_id), owner).unwrap();
    let a = reg.register(&metric(&format!("{owner}/shd"), context_id), owner).unwrap();
    let mut ctx = BenchmarkContext::new(context_id);
    ctx.datasets.insert(d.id);
    ctx.models.insert(m.id);
    ctx.metrics.insert(a.id);
    ctx
}
