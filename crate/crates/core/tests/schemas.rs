//! The JSON schemas under `schemas/` are generated from the Rust types.
//! Run with `CB_BLESS=1` to regenerate them after a type change.

use std::path::PathBuf;

use causalbench_core::analysis::{CausalGraph, RunTable};
use causalbench_core::compat::CompatReport;
use causalbench_core::model::*;
use schemars::schema_for;

fn schemas() -> Vec<(&'static str, schemars::schema::RootSchema)> {
    vec![
        ("component-id", schema_for!(ComponentId)),
        ("descriptor", schema_for!(Descriptor)),
        ("benchmark-context", schema_for!(BenchmarkContext)),
        ("benchmark-scenario", schema_for!(BenchmarkScenario)),
        ("system-profile", schema_for!(SystemProfile)),
        ("scenario-result", schema_for!(ScenarioResult)),
        ("benchmark-run", schema_for!(BenchmarkRun)),
        ("compat-report", schema_for!(CompatReport)),
        ("causal-graph", schema_for!(CausalGraph)),
        ("run-table", schema_for!(RunTable)),
    ]
}

#[test]
fn schemas_are_in_sync() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas");
    let bless = std::env::var_os("CB_BLESS").is_some();
    let mut stale = Vec::new();
    for (name, schema) in schemas() {
        let path = dir.join(format!("{name}.schema.json"));
        let text = serde_json::to_string_pretty(&schema).unwrap() + "\n";
        if bless {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &text).unwrap();
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(text.as_str()) {
            stale.push(path.display().to_string());
        }
    }
    assert!(stale.is_empty(), "stale schemas (rerun with CB_BLESS=1): {stale:?}");
}
