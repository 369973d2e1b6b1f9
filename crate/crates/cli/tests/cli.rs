mod common;

use common::{component_fixture, Server};
use serde_json::json;

fn upload_fixtures(cb: &common::Cb) {
    for (kind, dir) in [("dataset", "toy-scm"), ("model", "threshold"), ("metric", "shd")] {
        let out = cb.run(&["upload", kind, component_fixture(dir).to_str().unwrap()]).ok();
        assert_eq!(out.line(), format!("demo/{dir}@1"));
    }
}

fn write_context(cb: &common::Cb, id: &str, hyper: &[&str]) -> String {
    let file = cb.path(&format!("{id}.json"));
    let file = file.to_str().unwrap().to_string();
    let mut args = vec![
        "context", "new", "--id", id, "--dataset", "demo/toy-scm@1", "--model", "demo/threshold@1", "--metric",
        "demo/shd@1", "--out", &file,
    ];
    for h in hyper {
        args.extend(["--hyper", h]);
    }
    cb.run(&args).ok();
    file
}

#[test]
fn upload_run_publish_and_refuse_deletion() {
    let server = Server::start();
    let cb = server.user("demo");
    upload_fixtures(&cb);

    // A second upload of the same directory becomes version 2.
    let again = cb.run(&["upload", "model", component_fixture("threshold").to_str().unwrap()]).ok();
    assert_eq!(again.line(), "demo/threshold@2");

    let ctx = write_context(&cb, "ctx-cli", &[r#"demo/threshold@1={"threshold":0.3}"#]);
    let validated = cb.run(&["--json", "context", "validate", &ctx]).ok().json();
    assert_eq!(validated["compatible"], json!(true));
    assert_eq!(validated["scenarios"].as_array().unwrap().len(), 1);

    let run = cb.run(&["run", "--context", &ctx]).ok();
    let run_id = run.line().to_string();
    assert_eq!(run_id.len(), 26, "{}", run.stderr);
    assert!(cb.path("cache/runs").join(format!("{run_id}.json")).is_file());

    let uploaded = cb.run(&["upload-run", &run_id]).ok();
    assert_eq!(uploaded.line(), run_id);

    let first = cb.run(&["publish", "run", &run_id]).ok();
    let second = cb.run(&["publish", "run", &run_id]).ok();
    assert!(first.line().starts_with("10.70000/cb."), "{}", first.stdout);
    assert_eq!(first.line(), second.line());

    let deleted = cb.run(&["delete", "component", "demo/threshold@1"]);
    assert_eq!(deleted.code, 1);
    assert!(deleted.stderr.contains("permanent"), "{}", deleted.stderr);

    // The unused second version is still private and deletable.
    cb.run(&["delete", "component", "demo/threshold@2"]).ok();

    let runs = server.anonymous().run(&["--json", "list", "runs"]).ok().json();
    assert_eq!(runs["total"], json!(1));
    assert_eq!(runs["items"][0]["visibility"], json!("public"));
}

#[test]
fn json_output_is_canonical() {
    let server = Server::start();
    let cb = server.user("demo");
    upload_fixtures(&cb);
    for args in [
        vec!["--json", "list", "models"],
        vec!["--json", "list", "datasets", "--scope", "mine"],
        vec!["--json", "suggest", "--chosen", "demo/toy-scm@1"],
    ] {
        let out = cb.run(&args).ok();
        let value = out.json();
        let canonical = causalbench_core::canonical::to_string(&value).unwrap();
        assert_eq!(out.stdout.trim_end(), canonical, "{args:?}");
    }
    let models = cb.run(&["--json", "list", "models"]).ok().json();
    assert_eq!(models["items"][0]["id"], json!("demo/threshold@1"));
    let suggestion = cb.run(&["--json", "suggest", "--chosen", "demo/toy-scm@1"]).ok().json();
    assert_eq!(suggestion["models"]["suitable"], json!(["demo/threshold@1"]));
    assert_eq!(suggestion["metrics"]["suitable"], json!(["demo/shd@1"]));
}

#[test]
fn download_unpacks_the_verified_archive() {
    let server = Server::start();
    let cb = server.user("demo");
    upload_fixtures(&cb);
    let out = cb.path("got");
    cb.run(&["download", "demo/toy-scm@1", "--out", out.to_str().unwrap()]).ok();
    for file in ["manifest.json", "observations.csv", "true_graph.csv"] {
        assert!(out.join(file).is_file(), "{file}");
    }
    let original = std::fs::read(component_fixture("toy-scm").join("observations.csv")).unwrap();
    assert_eq!(std::fs::read(out.join("observations.csv")).unwrap(), original);

    let archive = cb.path("threshold.tar.gz");
    cb.run(&["download", "demo/threshold@1", "--archive", archive.to_str().unwrap()]).ok();
    assert!(causalbench_registry::archive::unpack(&std::fs::read(&archive).unwrap()).is_ok());
}

#[test]
fn private_components_are_invisible_to_others() {
    let server = Server::start();
    upload_fixtures(&server.user("demo"));
    let bob = server.user("bob");
    let out = bob.run(&["download", "demo/toy-scm@1", "--out", bob.path("x").to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("forbidden"), "{}", out.stderr);
    let listed = bob.run(&["--json", "list", "datasets"]).ok().json();
    assert_eq!(listed["total"], json!(0));
}

#[test]
fn writes_need_a_key_and_wrong_owners_are_refused() {
    let server = Server::start();
    let anon = server.anonymous();
    let out = anon.run(&["upload", "dataset", component_fixture("toy-scm").to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("api_key"), "{}", out.stderr);

    let bob = server.user("bob");
    let out = bob.run(&["upload", "dataset", component_fixture("toy-scm").to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("not_owner"), "{}", out.stderr);

    let out = bob.run(&["upload", "model", component_fixture("toy-scm").to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("not a model"), "{}", out.stderr);
}

#[test]
fn incompatible_contexts_fail_validation() {
    let server = Server::start();
    let cb = server.user("demo");
    upload_fixtures(&cb);
    let file = cb.path("bad.json");
    cb.run(&[
        "context", "new", "--id", "bad", "--dataset", "demo/toy-scm@1", "--model", "demo/threshold@1", "--metric",
        "demo/shd@1", "--out", file.to_str().unwrap(),
    ])
    .ok();
    // Swap the dataset for the metric: the context now names a metric where a dataset belongs.
    let mut ctx: serde_json::Value = serde_json::from_slice(&std::fs::read(&file).unwrap()).unwrap();
    ctx["datasets"] = json!(["demo/shd@1"]);
    std::fs::write(&file, ctx.to_string()).unwrap();
    let out = cb.run(&["context", "validate", file.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("not a dataset"), "{}", out.stderr);

    let offline = cb.run(&["context", "validate", "--offline", file.to_str().unwrap()]).ok();
    assert!(offline.stdout.contains("1 scenarios"), "{}", offline.stdout);
}

#[test]
fn server_errors_exit_with_two() {
    let server = Server::start();
    let cb = server.user("demo");
    upload_fixtures(&cb);
    let ctx = write_context(&cb, "ctx-down", &[]);
    let run_id = cb.run(&["run", "--context", &ctx, "--upload"]).ok().line().to_string();
    server.sim.set_down(true);
    let out = cb.run(&["publish", "run", &run_id]);
    assert_eq!(out.code, 2, "{}", out.stderr);
    assert!(out.stderr.contains("registrar_unavailable"), "{}", out.stderr);
    server.sim.set_down(false);
    cb.run(&["publish", "run", &run_id]).ok();

    let unreachable = common::Cb::new("http://127.0.0.1:1", "cbk_x");
    let out = unreachable.run(&["list", "models"]);
    assert_eq!(out.code, 2);
}

#[test]
fn config_problems_are_user_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = causalbench_cli::dispatch_to(
        ["cb", "--config", missing.to_str().unwrap(), "list", "models"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 1);
    assert!(String::from_utf8_lossy(&err).contains("init-config"));

    let bad = dir.path().join("bad");
    std::fs::write(&bad, "server_url = http://h\ntimeout_s = -1\n").unwrap();
    let mut err = Vec::new();
    let code = causalbench_cli::dispatch_to(["cb", "--config", bad.to_str().unwrap(), "list", "models"], &mut out, &mut err);
    assert_eq!(code, 1);
    assert!(String::from_utf8_lossy(&err).contains("timeout_s"));

    let mut err = Vec::new();
    let code = causalbench_cli::dispatch_to(["cb", "frobnicate"], &mut out, &mut err);
    assert_eq!(code, 1);
}

#[test]
fn analyze_commands_reach_every_endpoint() {
    let server = Server::start();
    let cb = server.user("demo");
    upload_fixtures(&cb);
    let ctx = write_context(
        &cb,
        "ctx-grid",
        &[r#"demo/threshold@1={"threshold":0.1}"#, r#"demo/threshold@1={"threshold":0.5}"#],
    );
    cb.run(&["run", "--context", &ctx, "--upload"]).ok();

    let sliced = cb
        .run(&["--json", "analyze", "slice", "--group-by", "hyper.threshold", "--agg", "accuracy.demo/shd@1:mean"])
        .ok()
        .json();
    assert_eq!(sliced["rows"], json!(2));
    assert_eq!(sliced["result"]["rows"].as_array().unwrap().len(), 2);

    let csv = cb.run(&["analyze", "slice", "--filter", "hyper.threshold=0.5"]).ok();
    assert_eq!(csv.stdout.lines().count(), 2, "{}", csv.stdout);

    let front = cb
        .run(&["--json", "analyze", "pareto", "--objective", "accuracy.demo/shd@1:min", "--id-column", "scenario_key"])
        .ok()
        .json();
    assert!(!front["result"]["front"].as_array().unwrap().is_empty());

    let predicted = cb
        .run(&["--json", "analyze", "predict", "--set", "hyper.threshold=0.5", "--outcome", "accuracy.demo/shd@1"])
        .ok()
        .json();
    assert_eq!(predicted["result"]["outcomes"][0]["outcome"], json!("accuracy.demo/shd@1"));

    let rec = cb
        .run(&["--json", "analyze", "recommend", "--context", &ctx, "--grid", "hyper.threshold=0.1,0.5,0.9", "--k", "1"])
        .ok()
        .json();
    assert_eq!(rec["result"][0]["configuration"]["hyper.threshold"], json!(0.9));
    assert_eq!(rec["coverage"]["matched"].as_array().unwrap().len(), 2);

    let impact = cb
        .run(&[
            "--json", "analyze", "impact", "--factor", "hyper.threshold", "--level-a", "0.1", "--level-b", "0.5",
            "--outcome", "accuracy.demo/shd@1",
        ])
        .ok()
        .json();
    // SHD is 3 at threshold 0.1 and 2 at 0.5 on the toy dataset.
    assert_eq!(impact["result"]["estimate"], json!(1.0));
    assert_eq!(impact["result"]["unadjusted"], json!(1.0));
}
