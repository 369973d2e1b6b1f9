#![allow(dead_code)]

use std::path::PathBuf;

use causalbench_core::model::*;
use causalbench_harness::LocalSource;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn id(s: &str) -> ComponentId {
    s.parse().unwrap()
}

/// The shipped dataset, threshold model and SHD metric, plus the failing
/// test plugins.
pub fn source() -> LocalSource {
    let mut s = LocalSource::new();
    for dir in ["components/toy-scm", "components/threshold", "components/shd", "plugins/crash", "plugins/bad-metric", "plugins/vandal"] {
        s.add_dir(&fixtures().join(dir)).unwrap();
    }
    s
}

pub fn thresholds(values: &[f64]) -> Vec<HyperparameterSetting> {
    values.iter().map(|&t| HyperparameterSetting::empty().with("threshold", t)).collect()
}

pub fn reference_context(id_: &str, values: &[f64]) -> BenchmarkContext {
    let mut ctx = BenchmarkContext::new(id_);
    ctx.datasets.insert(id("demo/toy-scm@1"));
    ctx.models.insert(id("demo/threshold@1"));
    ctx.metrics.insert(id("demo/shd@1"));
    ctx.hyper_family.insert(id("demo/threshold@1"), thresholds(values));
    ctx
}
