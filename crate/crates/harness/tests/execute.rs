mod common;

use std::process::Command;

use causalbench_core::model::*;
use causalbench_harness::*;
use causalbench_registry::{LocalSim, Registry};
use common::*;

fn harness(root: &std::path::Path) -> Harness {
    Harness::new(ExecutionLimits::new(root).with_timeout(30.0)).unwrap()
}

fn instrumented(ctx: &BenchmarkContext) -> InstrumentedContext {
    instrument(ctx, &resolve_environment().unwrap()).unwrap()
}

/// SHD per threshold from the numpy oracle script.
fn oracle(thresholds: &[&str]) -> serde_json::Value {
    let out = Command::new(plugin::python_interpreter())
        .arg(fixtures().join("oracle/shd_oracle.py"))
        .arg(fixtures().join("components/toy-scm"))
        .args(thresholds)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn reference_triple_matches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = reference_context("ref", &[0.3, 0.5, 0.7]);
    let run = harness(dir.path()).execute(&instrumented(&ctx), &source(), "demo").unwrap();

    assert!(validate_run(&run, &ctx).is_clean(), "{:?}", validate_run(&run, &ctx));
    assert_eq!(run.results.len(), 3);
    let expected = oracle(&["0.3", "0.5", "0.7"]);
    let shd = id("demo/shd@1");
    for r in &run.results {
        assert_eq!(r.status, ScenarioStatus::Ok, "{}", r.log_excerpt);
        let t = r.scenario.hyper.values["threshold"].as_f64().unwrap();
        assert_eq!(r.accuracy[&shd], expected[format!("{t}")].as_f64().unwrap(), "threshold {t}");
        assert!(r.timing.cpu_time_s <= r.timing.wall_time_s * f64::from(run.profile.physical_cores) + 1e-9);
        assert!(r.resources.peak_cpu_memory_bytes > 0);
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0, "workdirs left behind");
}

#[test]
fn results_follow_canonical_scenario_order() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = reference_context("order", &[0.7, 0.3]);
    ctx.models.insert(id("demo/crash@1"));
    let inst = instrumented(&ctx);
    let run = harness(dir.path()).execute(&inst, &source(), "demo").unwrap();
    let got: Vec<_> = run.results.iter().map(|r| r.scenario.clone()).collect();
    assert_eq!(got, inst.scenarios);
    assert_eq!(run.results.len(), 3);
    assert!(validate_run(&run, &ctx).is_clean());
}

#[test]
fn a_crashing_model_does_not_stop_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = reference_context("crash", &[0.5]);
    ctx.models.insert(id("demo/crash@1"));
    let run = harness(dir.path()).execute(&instrumented(&ctx), &source(), "demo").unwrap();
    assert!(validate_run(&run, &ctx).is_clean());
    let crashed = run.results.iter().find(|r| r.scenario.model == id("demo/crash@1")).unwrap();
    assert_eq!(crashed.status, ScenarioStatus::ModelFailed);
    assert!(crashed.accuracy.is_empty());
    assert!(crashed.log_excerpt.contains("refusing to run"));
    assert!(crashed.timing.wall_time_s > 0.0);
    let ok = run.results.iter().find(|r| r.scenario.model == id("demo/threshold@1")).unwrap();
    assert_eq!(ok.status, ScenarioStatus::Ok);

    let run_dir = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    let kept: Vec<_> = std::fs::read_dir(run_dir.join("scenarios")).unwrap().collect();
    assert_eq!(kept.len(), 1, "only the failed scenario's workdir is kept");
}

#[test]
fn a_failing_metric_keeps_the_other() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = reference_context("metric", &[0.5]);
    ctx.metrics.insert(id("demo/bad-metric@1"));
    let run = harness(dir.path()).execute(&instrumented(&ctx), &source(), "demo").unwrap();
    assert!(validate_run(&run, &ctx).is_clean());
    let r = &run.results[0];
    assert_eq!(r.status, ScenarioStatus::MetricFailed);
    assert!(r.accuracy.contains_key(&id("demo/shd@1")));
    assert!(!r.accuracy.contains_key(&id("demo/bad-metric@1")));
    assert!(r.log_excerpt.contains("cannot score"));
}

#[test]
fn reexecution_reproduces_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = reference_context("again", &[0.3, 0.5]);
    let inst = instrumented(&ctx);
    let h = harness(dir.path());
    let a = h.execute(&inst, &source(), "demo").unwrap();
    let b = h.execute(&inst, &source(), "demo").unwrap();
    assert_ne!(a.run_id, b.run_id);
    let acc = |r: &BenchmarkRun| r.results.iter().map(|x| x.accuracy.clone()).collect::<Vec<_>>();
    assert_eq!(acc(&a), acc(&b));
}

#[test]
fn seed_is_passed_through_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = BenchmarkContext::new("seeded");
    ctx.datasets.insert(id("demo/toy-scm@1"));
    ctx.models.insert(id("demo/crash@1"));
    ctx.metrics.insert(id("demo/shd@1"));
    ctx.hyper_family.insert(id("demo/crash@1"), vec![HyperparameterSetting::empty().with("seed", 42i64)]);
    harness(dir.path()).execute(&instrumented(&ctx), &source(), "demo").unwrap();
    let run_dir = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    let params = std::fs::read_to_string(run_dir.join("scenarios/0000/params.json")).unwrap();
    assert_eq!(params, r#"{"seed":42}"#);
    let inputs: plugin::PluginInputs =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("scenarios/0000/inputs.json")).unwrap()).unwrap();
    assert!(inputs.inputs["observations"].is_absolute());
    assert!(inputs.inputs["observations"].starts_with(&run_dir));
}

#[test]
fn incompatible_scenarios_are_refused_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let plugin_dir = tempfile::tempdir().unwrap();
    std::fs::write(plugin_dir.path().join("run.py"), "raise SystemExit(0)\n").unwrap();
    std::fs::write(
        plugin_dir.path().join("manifest.json"),
        r#"{"kind":"model","descriptor":{"kind":"model","id":"demo/effects@1","entrypoint":"run.py",
            "signature":{"task":"causal-discovery",
              "inputs":[{"port_name":"effects","data_role":"treatment-effect-estimates","required":true}],
              "outputs":[{"port_name":"predicted_graph","data_role":"causal-graph","required":true}]}}}"#,
    )
    .unwrap();
    let mut src = source();
    src.add_dir(plugin_dir.path()).unwrap();
    let mut ctx = reference_context("bad", &[0.5]);
    ctx.models.insert(id("demo/effects@1"));
    let err = harness(dir.path()).execute(&instrumented(&ctx), &src, "demo").unwrap_err();
    assert!(matches!(err, HarnessError::IncompatibleScenario { .. }), "{err}");
    let run_dir = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    assert!(!run_dir.join("scenarios").exists(), "nothing ran");
}

#[test]
fn wrong_kinds_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = reference_context("kinds", &[0.5]);
    ctx.models.insert(id("demo/shd@1"));
    let err = harness(dir.path()).execute(&instrumented(&ctx), &source(), "demo").unwrap_err();
    assert!(matches!(err, HarnessError::Component { .. }), "{err}");
}

#[test]
fn tampered_instrumentation_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = reference_context("t", &[0.3, 0.5]);
    let mut inst = instrumented(&ctx);
    inst.scenarios.pop();
    assert!(matches!(
        harness(dir.path()).execute(&inst, &source(), "demo"),
        Err(HarnessError::InvalidInstrumentation(_))
    ));
}

#[test]
fn plugins_cannot_reach_the_store() {
    let store_dir = tempfile::tempdir().unwrap();
    let work = tempfile::tempdir().unwrap();
    let reg = Registry::open(store_dir.path(), Box::new(LocalSim::new())).unwrap();
    let local = source();
    for name in ["demo/toy-scm@1", "demo/vandal@1", "demo/shd@1"] {
        let (_, bytes) = causalbench_harness::ComponentSource::fetch(&local, &id(name)).unwrap();
        reg.register(&bytes, "demo").unwrap();
    }
    let mut ctx = BenchmarkContext::new("vandal");
    ctx.datasets.insert(id("demo/toy-scm@1"));
    ctx.models.insert(id("demo/vandal@1"));
    ctx.metrics.insert(id("demo/shd@1"));
    let before = reg.snapshot().unwrap();
    let src = RegistrySource { registry: &reg, principal: Some("demo") };
    let run = harness(work.path()).execute(&instrumented(&ctx), &src, "demo").unwrap();
    assert_ne!(run.results[0].status, ScenarioStatus::Ok);
    assert!(reg.audit().unwrap().is_clean());
    assert_eq!(reg.snapshot().unwrap(), before);
    let (_, bytes) = reg.fetch(&id("demo/toy-scm@1"), Some("demo")).unwrap();
    assert_eq!(bytes, causalbench_harness::ComponentSource::fetch(&local, &id("demo/toy-scm@1")).unwrap().1);
}
