mod common;

use axum::http::{Method, StatusCode};
use causalbench_core::canonical;
use causalbench_core::model::*;
use causalbench_core::testing;
use common::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::json;

/// Registers a dataset, model and metric for `user` over HTTP and returns a
/// context over them (not yet stored).
fn trio(app: &App, key: &str, user: &str, tag: &str) -> BenchmarkContext {
    let mut ctx = BenchmarkContext::new(format!("ctx-{tag}"));
    for (bytes, set) in [
        (dataset(&format!("{user}/scm-{tag}"), tag), 0),
        (model(&format!("{user}/pc-{tag}"), tag), 1),
        (metric(&format!("{user}/shd-{tag}"), tag), 2),
    ] {
        let r = app.send(Method::POST, "/v1/components", Some(key), bytes);
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        let id: ComponentId = serde_json::from_value(r.json()["id"].clone()).unwrap();
        [&mut ctx.datasets, &mut ctx.models, &mut ctx.metrics][set].insert(id);
    }
    ctx
}

fn assert_error(r: &Response, status: StatusCode, code: &str) {
    assert_eq!(r.status, status, "{}", r.text());
    let body = r.json();
    assert_eq!(body["error"], code, "{body}");
    assert!(body["detail"].as_str().is_some_and(|d| !d.is_empty()), "{body}");
}

#[test]
fn health_reports_the_registrar() {
    let app = App::new();
    let r = app.get("/v1/health", None);
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["status"], "ok");
    assert_eq!(r.json()["registrar"], "local-sim");
}

#[test]
fn whoami_names_the_key_holder() {
    let app = App::new();
    let key = app.key("alice");
    assert_eq!(app.get("/v1/whoami", Some(&key)).json(), json!({"user_name": "alice"}));
    assert_error(&app.get("/v1/whoami", None), StatusCode::UNAUTHORIZED, "unauthenticated");
}

#[test]
fn anonymous_listing_shows_public_models_only() {
    let app = App::new();
    let key = app.key("alice");
    for name in ["alice/pub", "alice/priv"] {
        let r = app.send(Method::POST, "/v1/components", Some(&key), model(name, name));
        assert_eq!(r.status, StatusCode::CREATED);
    }
    let r = app.send(Method::POST, "/v1/components", Some(&key), dataset("alice/data", "d"));
    assert_eq!(r.status, StatusCode::CREATED);
    for id in ["alice/pub@1", "alice/data@1"] {
        let r = app.send(Method::POST, &format!("{}/publish", component_path(&common::id(id))), Some(&key), vec![]);
        assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    }

    let r = app.get("/v1/components?kind=model", None);
    assert_eq!(r.status, StatusCode::OK);
    let names: Vec<String> =
        r.json()["items"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, ["alice/pub@1"]);

    let r = app.get("/v1/components?kind=model", Some(&key));
    assert_eq!(r.json()["total"], 2);
    let r = app.get("/v1/components?kind=model&scope=public", Some(&key));
    assert_eq!(r.json()["total"], 1);
}

#[test]
fn private_components_are_hidden_from_others() {
    let app = App::new();
    let alice = app.key("alice");
    let bob = app.key("bob");
    app.send(Method::POST, "/v1/components", Some(&alice), model("alice/m", "x"));
    let path = component_path(&id("alice/m@1"));
    assert_eq!(app.get(&path, Some(&alice)).status, StatusCode::OK);
    assert_error(&app.get(&path, Some(&bob)), StatusCode::FORBIDDEN, "forbidden");
    assert_error(&app.get(&format!("{path}/payload"), None), StatusCode::FORBIDDEN, "forbidden");
    assert_error(&app.get("/v1/components/alice/none/1", Some(&alice)), StatusCode::NOT_FOUND, "unknown_component");
}

#[test]
fn writes_need_a_valid_key() {
    let app = App::new();
    let bytes = model("alice/m", "x");
    assert_error(&app.send(Method::POST, "/v1/components", None, bytes.clone()), StatusCode::UNAUTHORIZED, "unauthenticated");
    assert_error(
        &app.send(Method::POST, "/v1/components", Some("cbk_nope"), bytes.clone()),
        StatusCode::UNAUTHORIZED,
        "unauthenticated",
    );
    // A bad key is refused even on endpoints that allow anonymous reads.
    assert_error(&app.get("/v1/components", Some("cbk_nope")), StatusCode::UNAUTHORIZED, "unauthenticated");

    let key = app.key("alice");
    app.registry.set_active("alice", false).unwrap();
    assert_error(&app.send(Method::POST, "/v1/components", Some(&key), bytes), StatusCode::UNAUTHORIZED, "unauthenticated");
}

#[test]
fn registration_errors_map_to_statuses() {
    let app = App::new();
    let key = app.key("alice");
    let r = app.send(Method::POST, "/v1/components", Some(&key), model("alice/m", "1"));
    assert_eq!(r.status, StatusCode::CREATED);
    assert_eq!(r.json()["id"], "alice/m@1");
    assert_error(&app.send(Method::POST, "/v1/components", Some(&key), model("alice/m", "2")), StatusCode::CONFLICT, "name_taken");
    assert_error(&app.send(Method::POST, "/v1/components", Some(&key), model("bob/m", "2")), StatusCode::FORBIDDEN, "not_owner");
    assert_error(
        &app.send(Method::POST, "/v1/components", Some(&key), b"not a tarball".to_vec()),
        StatusCode::UNPROCESSABLE_ENTITY,
        "corrupt_archive",
    );

    let r = app.send(Method::POST, "/v1/components/alice/m/versions", Some(&key), model("alice/m", "2"));
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
    assert_eq!(r.json()["id"], "alice/m@2");
    assert_error(
        &app.send(Method::POST, "/v1/components/alice/other/versions", Some(&key), model("alice/other", "2")),
        StatusCode::NOT_FOUND,
        "unknown_component",
    );
    assert_error(&app.get("/v1/components/alice/m/zero", None), StatusCode::UNPROCESSABLE_ENTITY, "schema_violation");
}

#[test]
fn payload_download_and_repair() {
    let app = App::new();
    let key = app.key("alice");
    let bytes = model("alice/m", "x");
    app.send(Method::POST, "/v1/components", Some(&key), bytes.clone());
    let path = format!("{}/payload", component_path(&id("alice/m@1")));
    let r = app.get(&path, Some(&key));
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body, bytes);
    assert_eq!(r.headers["content-type"], "application/gzip");
    assert_eq!(r.headers["x-payload-sha256"], canonical::sha256_hex(&bytes).as_str());

    assert_eq!(app.send(Method::PUT, &path, Some(&key), bytes.clone()).status, StatusCode::NO_CONTENT);
    assert_error(&app.send(Method::PUT, &path, Some(&key), model("alice/m", "y")), StatusCode::CONFLICT, "conflict");
}

#[test]
fn deleting_a_permanent_component_is_a_conflict() {
    let app = App::new();
    let key = app.key("alice");
    let ctx = trio(&app, &key, "alice", "a");
    assert_eq!(app.post_json("/v1/contexts", Some(&key), &ctx).status, StatusCode::CREATED);
    let run = testing::complete_run(&mut StdRng::seed_from_u64(1), &ctx, "alice");
    let r = app.post_json("/v1/runs", Some(&key), &run);
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
    assert_eq!(r.json()["run_id"], run.run_id);

    let first = app.send(Method::POST, &format!("/v1/runs/{}/publish", run.run_id), Some(&key), vec![]);
    assert_eq!(first.status, StatusCode::OK, "{}", first.text());
    let second = app.send(Method::POST, &format!("/v1/runs/{}/publish", run.run_id), Some(&key), vec![]);
    assert_eq!(first.json()["identifier"], second.json()["identifier"]);

    let model_id = ctx.models.iter().next().unwrap();
    let r = app.send(Method::DELETE, &component_path(model_id), Some(&key), vec![]);
    assert_error(&r, StatusCode::CONFLICT, "permanent_entity");
    let r = app.send(Method::DELETE, &format!("/v1/runs/{}", run.run_id), Some(&key), vec![]);
    assert_error(&r, StatusCode::CONFLICT, "permanent_entity");

    // The published run and its components are now readable anonymously.
    assert_eq!(app.get(&format!("/v1/runs/{}", run.run_id), None).status, StatusCode::OK);
    assert_eq!(app.get(&format!("{}/payload", component_path(model_id)), None).status, StatusCode::OK);
}

#[test]
fn invalid_runs_are_rejected_with_violations() {
    let app = App::new();
    let key = app.key("alice");
    let ctx = trio(&app, &key, "alice", "a");
    app.post_json("/v1/contexts", Some(&key), &ctx);
    let mut run = testing::complete_run(&mut StdRng::seed_from_u64(2), &ctx, "alice");
    let dropped = run.results.pop().unwrap();
    let r = app.post_json("/v1/runs", Some(&key), &run);
    assert_error(&r, StatusCode::UNPROCESSABLE_ENTITY, "invalid_run");
    let violations = r.json()["violations"].as_array().unwrap().clone();
    assert_eq!(violations, vec![json!({"violation": "missing-scenario", "scenario_key": dropped.scenario.key()})]);

    assert_error(
        &app.send(Method::POST, "/v1/runs", Some(&key), b"{\"run_id\": 3}".to_vec()),
        StatusCode::UNPROCESSABLE_ENTITY,
        "schema_violation",
    );
    assert_error(&app.get("/v1/runs/nope", Some(&key)), StatusCode::NOT_FOUND, "unknown_run");
}

#[test]
fn contexts_round_trip() {
    let app = App::new();
    let key = app.key("alice");
    let ctx = trio(&app, &key, "alice", "a");
    assert_eq!(app.post_json("/v1/contexts", Some(&key), &ctx).status, StatusCode::CREATED);
    assert_eq!(app.post_json("/v1/contexts", Some(&key), &ctx).status, StatusCode::CREATED);
    let r = app.get(&format!("/v1/contexts/{}", ctx.context_id), None);
    let back: BenchmarkContext = serde_json::from_slice(&r.body).unwrap();
    assert_eq!(back, ctx);
    let mut other = ctx.clone();
    other.metrics.clear();
    other.metrics.insert(ctx.datasets.iter().next().unwrap().clone());
    assert_error(&app.post_json("/v1/contexts", Some(&key), &other), StatusCode::UNPROCESSABLE_ENTITY, "schema_violation");
    assert_error(&app.get("/v1/contexts/none", None), StatusCode::NOT_FOUND, "unknown_context");
}

#[test]
fn registrar_outage_is_service_unavailable() {
    let app = App::new();
    let key = app.key("alice");
    let ctx = trio(&app, &key, "alice", "a");
    app.post_json("/v1/contexts", Some(&key), &ctx);
    let run = testing::complete_run(&mut StdRng::seed_from_u64(3), &ctx, "alice");
    app.post_json("/v1/runs", Some(&key), &run);
    app.sim.set_down(true);
    let r = app.send(Method::POST, &format!("/v1/runs/{}/publish", run.run_id), Some(&key), vec![]);
    assert_error(&r, StatusCode::SERVICE_UNAVAILABLE, "registrar_unavailable");
    app.sim.set_down(false);
    let r = app.send(Method::POST, &format!("/v1/runs/{}/publish", run.run_id), Some(&key), vec![]);
    assert_eq!(r.status, StatusCode::OK);
}

#[test]
fn run_listing_filters_and_pages() {
    let app = App::new();
    let alice = app.key("alice");
    let bob = app.key("bob");
    let ctx = trio(&app, &alice, "alice", "a");
    app.post_json("/v1/contexts", Some(&alice), &ctx);
    let mut rng = StdRng::seed_from_u64(4);
    for _ in 0..3 {
        let run = testing::complete_run(&mut rng, &ctx, "alice");
        assert_eq!(app.post_json("/v1/runs", Some(&alice), &run).status, StatusCode::CREATED);
    }
    let r = app.get("/v1/runs?page_size=2", Some(&alice));
    assert_eq!(r.json()["total"], 3);
    assert_eq!(r.json()["items"].as_array().unwrap().len(), 2);
    assert_eq!(app.get("/v1/runs", Some(&bob)).json()["total"], 0);
    assert_eq!(app.get("/v1/runs", None).json()["total"], 0);
    assert_eq!(app.get(&format!("/v1/runs?context_id={}", ctx.context_id), Some(&alice)).json()["total"], 3);
    assert_error(&app.get("/v1/runs?page_size=1000", None), StatusCode::UNPROCESSABLE_ENTITY, "schema_violation");
    assert_error(&app.get("/v1/runs?page=abc", None), StatusCode::UNPROCESSABLE_ENTITY, "schema_violation");
}

#[test]
fn unknown_routes_and_methods_carry_error_bodies() {
    let app = App::new();
    assert_error(&app.get("/v1/nothing", None), StatusCode::NOT_FOUND, "not_found");
    assert_error(&app.send(Method::PATCH, "/v1/runs", None, vec![]), StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed");
}

#[test]
fn suggest_partitions_visible_components() {
    let app = App::new();
    let key = app.key("alice");
    let ctx = trio(&app, &key, "alice", "a");
    app.send(Method::POST, "/v1/components", Some(&key), effects_model("alice/needs-effects"));
    let chosen: Vec<&ComponentId> = ctx.datasets.iter().collect();
    let r = app.post_json("/v1/compat/suggest", Some(&key), &json!({ "chosen": chosen }));
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    let body = r.json();
    assert_eq!(body["models"]["suitable"], json!([ctx.models.iter().next().unwrap()]));
    assert_eq!(body["models"]["incompatible"][0]["id"], "alice/needs-effects@1");
    assert_eq!(body["metrics"]["suitable"], json!([ctx.metrics.iter().next().unwrap()]));

    let r = app.post_json("/v1/compat/suggest", None, &json!({ "chosen": chosen }));
    assert_error(&r, StatusCode::FORBIDDEN, "forbidden");
}

#[test]
fn analysis_endpoints_answer_over_accessible_runs() {
    let app = App::new();
    let key = app.key("alice");
    let ctx = trio(&app, &key, "alice", "a");
    app.post_json("/v1/contexts", Some(&key), &ctx);
    let mut rng = StdRng::seed_from_u64(5);
    let mut runs = Vec::new();
    for _ in 0..2 {
        let run = testing::complete_run(&mut rng, &ctx, "alice");
        app.post_json("/v1/runs", Some(&key), &run);
        runs.push(run);
    }
    let metric = format!("accuracy.{}", ctx.metrics.iter().next().unwrap());

    let r = app.post_json(
        "/v1/analysis/slice",
        Some(&key),
        &json!({"group_by": ["model"], "aggregates": [{"column": "wall_time_s", "fn": "count"}]}),
    );
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    assert_eq!(r.json()["rows"], 2);
    assert!(r.json().get("coverage").is_none());

    // Anonymous callers see no private rows.
    let r = app.post_json("/v1/analysis/slice", None, &json!({}));
    assert_eq!(r.json()["rows"], 0);

    let r = app.post_json(
        "/v1/analysis/slice",
        Some(&key),
        &json!({"context_id": ctx.context_id}),
    );
    assert_eq!(r.json()["coverage"]["runs"].as_array().unwrap().len(), 2);
    assert_eq!(r.json()["coverage"]["unmatched"], json!([]));

    let r = app.post_json(
        "/v1/analysis/pareto",
        Some(&key),
        &json!({"objectives": [{"column": metric, "direction": "minimize"}, {"column": "wall_time_s", "direction": "minimize"}], "id_column": "run_id"}),
    );
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    let front = r.json()["result"]["front"].as_array().unwrap().clone();
    let point = |run: &BenchmarkRun| (run.results[0].accuracy.values().next().copied().unwrap(), run.results[0].timing.wall_time_s);
    let (a, b) = (point(&runs[0]), point(&runs[1]));
    let dominates = |x: (f64, f64), y: (f64, f64)| x.0 <= y.0 && x.1 <= y.1 && (x.0 < y.0 || x.1 < y.1);
    let expected: Vec<&str> = runs
        .iter()
        .zip([(a, b), (b, a)])
        .filter(|(_, (me, other))| !dominates(*other, *me))
        .map(|(r, _)| r.run_id.as_str())
        .collect();
    assert_eq!(front, expected.iter().map(|s| json!(s)).collect::<Vec<_>>());

    let r = app.post_json(
        "/v1/analysis/predict",
        Some(&key),
        &json!({"target": {"model": ctx.models.iter().next().unwrap()}, "outcomes": ["wall_time_s"]}),
    );
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    let mean = (runs[0].results[0].timing.wall_time_s + runs[1].results[0].timing.wall_time_s) / 2.0;
    let point = r.json()["result"]["outcomes"][0]["point"].as_f64().unwrap();
    assert!((point - mean).abs() < 1e-9, "{point} vs {mean}");

    let r = app.post_json(
        "/v1/analysis/impact",
        Some(&key),
        &json!({"treatment": {"factor": "model", "level_a": "x", "level_b": "y"}, "outcome": "wall_time_s"}),
    );
    assert_error(&r, StatusCode::UNPROCESSABLE_ENTITY, "analysis_failed");

    let r = app.post_json(
        "/v1/analysis/recommend",
        Some(&key),
        &json!({"grid": {"model": [ctx.models.iter().next().unwrap(), "alice/new@1"]}, "k": 1}),
    );
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    assert_eq!(r.json()["result"][0]["configuration"]["model"], "alice/new@1");

    assert_error(&app.post_json("/v1/analysis/pareto", Some(&key), &json!({})), StatusCode::UNPROCESSABLE_ENTITY, "schema_violation");
}

#[test]
fn responses_never_carry_keys_or_key_hashes() {
    let app = App::new();
    let key = app.key("alice");
    let hash = canonical::sha256_hex(key.as_bytes());
    let ctx = trio(&app, &key, "alice", "a");
    let run = testing::complete_run(&mut StdRng::seed_from_u64(6), &ctx, "alice");
    let responses = [
        app.post_json("/v1/contexts", Some(&key), &ctx),
        app.post_json("/v1/runs", Some(&key), &run),
        app.get("/v1/runs", Some(&key)),
        app.get(&format!("/v1/runs/{}", run.run_id), Some(&key)),
        app.send(Method::POST, &format!("/v1/runs/{}/publish", run.run_id), Some(&key), vec![]),
        app.get("/v1/components", Some(&key)),
        app.get("/v1/health", Some(&key)),
        app.get("/v1/components?scope=mine", Some(&key)),
        app.post_json("/v1/analysis/slice", Some(&key), &json!({})),
        app.get("/v1/nothing", Some(&key)),
        app.get("/v1/components", Some(&format!("{key}x"))),
    ];
    for r in responses {
        let mut all = r.text();
        for (name, value) in &r.headers {
            all.push_str(name.as_str());
            all.push_str(&String::from_utf8_lossy(value.as_bytes()));
        }
        assert!(!all.contains(&key) && !all.contains(&hash), "{all}");
        assert!(!all.contains("api_key"), "{all}");
    }
}
