//! Random operation sequences applied to one registry directly and to
//! another through the HTTP API must give the same outcome at every step
//! and the same store at the end.

mod common;

use std::collections::BTreeMap;

use axum::http::{Method, StatusCode};
use causalbench_core::model::*;
use causalbench_core::testing;
use causalbench_registry::*;
use causalbench_server::status_of;
use common::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use serde_json::Value;

const OPS_PER_CASE: usize = 250;
const USERS: [&str; 2] = ["alice", "bob"];
const KINDS: [&str; 3] = ["d", "m", "a"];

struct Sides {
    direct: Registry,
    _direct_dir: tempfile::TempDir,
    app: App,
    keys: BTreeMap<&'static str, String>,
}

#[derive(Default)]
struct Seen {
    components: BTreeMap<ComponentId, Vec<u8>>,
    contexts: Vec<String>,
    runs: Vec<String>,
}

/// Drops fields that record wall-clock time of the call itself.
fn strip_clock(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("created_at");
            m.remove("minted_at");
            m.values_mut().for_each(strip_clock);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_clock),
        _ => {}
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap()
}

/// Direct outcome versus HTTP outcome. `Ok(Some(v))` also compares the
/// response body.
fn agree(step: usize, what: &str, direct: Result<Option<Value>, RegistryError>, http: &Response) {
    match direct {
        Ok(body) => {
            assert!(http.status.is_success(), "step {step} {what}: direct ok, http {} {}", http.status, http.text());
            if let Some(mut expected) = body {
                let mut got = http.json();
                strip_clock(&mut expected);
                strip_clock(&mut got);
                assert_eq!(got, expected, "step {step} {what}");
            }
        }
        Err(e) => {
            assert_eq!(http.status, status_of(&e), "step {step} {what}: {e} vs {}", http.text());
            assert_eq!(http.json()["error"], e.code(), "step {step} {what}");
        }
    }
}

fn payload(kind: usize, name: &str, nonce: u64) -> Vec<u8> {
    let nonce = nonce.to_string();
    match kind {
        0 => dataset(name, &nonce),
        1 => model(name, &nonce),
        _ => metric(name, &nonce),
    }
}

fn step(s: &Sides, seen: &mut Seen, rng: &mut StdRng, n: usize) {
    let user = USERS[rng.random_range(0..2)];
    let key = Some(s.keys[user].as_str());
    let reader = if rng.random_bool(0.3) { None } else { Some(user) };
    let reader_key = reader.map(|u| s.keys[u].as_str());
    let app = &s.app;
    match rng.random_range(0..15) {
        0..=2 => {
            let kind = rng.random_range(0..3);
            let owner = if rng.random_bool(0.9) { user } else { USERS[rng.random_range(0..2)] };
            let name = format!("{owner}/{}{}", KINDS[kind], rng.random_range(0..3));
            let bytes = payload(kind, &name, rng.random());
            let (direct, http) = if rng.random_bool(0.5) {
                (s.direct.register(&bytes, user), app.send(Method::POST, "/v1/components", key, bytes.clone()))
            } else {
                let uri = format!("/v1/components/{name}/versions");
                (s.direct.new_version(&name, &bytes, user), app.send(Method::POST, &uri, key, bytes.clone()))
            };
            if let Ok(rec) = &direct {
                seen.components.insert(rec.id.clone(), bytes);
            }
            agree(n, "register", direct.map(|r| Some(to_value(&r))), &http);
        }
        3 => {
            let Some(id) = seen.components.keys().choose(rng).cloned() else { return };
            let http = app.send(Method::DELETE, &component_path(&id), key, vec![]);
            agree(n, "delete component", s.direct.delete_component(&id, user).map(|_| None), &http);
        }
        4 => {
            let Some(id) = seen.components.keys().choose(rng).cloned() else { return };
            let http = app.send(Method::POST, &format!("{}/publish", component_path(&id)), key, vec![]);
            agree(n, "publish component", s.direct.publish_component(&id, user).map(|p| Some(to_value(&p))), &http);
        }
        5 | 6 => {
            // Mostly the caller's own components, so that runs become possible.
            let own = rng.random_bool(0.85);
            let pick = |rng: &mut StdRng, prefix: &str| -> std::collections::BTreeSet<ComponentId> {
                let pool = seen.components.keys().filter(|id| id.slug().starts_with(prefix) && (!own || id.owner() == user));
                let k = rng.random_range(1..=2);
                pool.choose_multiple(rng, k).into_iter().cloned().collect()
            };
            let mut ctx = BenchmarkContext::new(format!("ctx-{}", rng.random_range(0..6)));
            ctx.datasets = pick(rng, "d");
            ctx.models = pick(rng, "m");
            ctx.metrics = pick(rng, "a");
            let http = app.post_json("/v1/contexts", key, &ctx);
            let direct = s.direct.put_context(&ctx, user);
            if direct.is_ok() && !seen.contexts.contains(&ctx.context_id) {
                seen.contexts.push(ctx.context_id.clone());
            }
            agree(n, "put context", direct.map(|_| Some(to_value(&ctx))), &http);
        }
        7 | 8 => {
            let Some(ctx_id) = seen.contexts.iter().choose(rng).cloned() else { return };
            let ctx = s.direct.context(&ctx_id).unwrap();
            let mut run = testing::complete_run(rng, &ctx, user);
            if rng.random_bool(0.2) {
                run.results.pop();
            }
            let http = app.post_json("/v1/runs", key, &run);
            let direct = s.direct.put_run(&run, user);
            if direct.is_ok() {
                seen.runs.push(run.run_id.clone());
            }
            agree(n, "put run", direct.map(|_| Some(serde_json::json!({"run_id": run.run_id}))), &http);
        }
        9 => {
            let Some(run_id) = seen.runs.iter().choose(rng).cloned() else { return };
            let http = app.send(Method::POST, &format!("/v1/runs/{run_id}/publish"), key, vec![]);
            agree(n, "publish run", s.direct.publish_run(&run_id, user).map(|p| Some(to_value(&p))), &http);
        }
        10 => {
            let Some(run_id) = seen.runs.iter().choose(rng).cloned() else { return };
            let http = app.send(Method::DELETE, &format!("/v1/runs/{run_id}"), key, vec![]);
            agree(n, "delete run", s.direct.delete_run(&run_id, user).map(|_| None), &http);
        }
        11 => {
            let Some(id) = seen.components.keys().choose(rng).cloned() else { return };
            let http = app.get(&format!("{}/payload", component_path(&id)), reader_key);
            match s.direct.fetch(&id, reader) {
                Ok((_, bytes)) => {
                    assert_eq!(http.status, StatusCode::OK, "step {n} fetch");
                    assert_eq!(http.body, bytes, "step {n} fetch");
                }
                Err(e) => agree(n, "fetch", Err(e), &http),
            }
            let http = app.get(&component_path(&id), reader_key);
            agree(n, "record", s.direct.record(&id, reader).map(|r| Some(to_value(&r))), &http);
        }
        12 => {
            let mut q = ComponentQuery { page: rng.random_range(1..=3), page_size: 4, ..ComponentQuery::default() };
            let mut uri = format!("/v1/components?page={}&page_size=4", q.page);
            if rng.random_bool(0.5) {
                let kind = [ComponentKind::Dataset, ComponentKind::Model, ComponentKind::Metric][rng.random_range(0..3)];
                q.kind = Some(kind);
                uri.push_str(&format!("&kind={}", kind.as_str()));
            }
            if rng.random_bool(0.5) {
                let (scope, text) = [(Scope::Mine, "mine"), (Scope::Public, "public"), (Scope::All, "all")][rng.random_range(0..3)];
                q.scope = scope;
                uri.push_str(&format!("&scope={text}"));
            }
            agree(n, "query", s.direct.query(&q, reader).map(|p| Some(to_value(&p))), &app.get(&uri, reader_key));
        }
        13 => {
            let mut q = RunQuery::default();
            let mut uri = "/v1/runs?page_size=50".to_string();
            q.page_size = 50;
            if let Some(ctx) = seen.contexts.iter().choose(rng).filter(|_| rng.random_bool(0.5)) {
                q.context_id = Some(ctx.clone());
                uri.push_str(&format!("&context_id={ctx}"));
            }
            agree(n, "query runs", s.direct.query_runs(&q, reader).map(|p| Some(to_value(&p))), &app.get(&uri, reader_key));
            if let Some(run_id) = seen.runs.iter().choose(rng) {
                let http = app.get(&format!("/v1/runs/{run_id}"), reader_key);
                agree(n, "get run", s.direct.run(run_id, reader).map(|r| Some(to_value(&r))), &http);
            }
        }
        _ => {
            let Some((id, bytes)) = seen.components.iter().choose(rng).map(|(i, b)| (i.clone(), b.clone())) else { return };
            let bytes = if rng.random_bool(0.5) { bytes } else { b"other".to_vec() };
            let http = app.send(Method::PUT, &format!("{}/payload", component_path(&id)), key, bytes.clone());
            agree(n, "repair", s.direct.repair_payload(&id, &bytes, user).map(|_| None), &http);
        }
    }
}

/// Gives every sequence a stored context and a private run to work on.
fn prelude(s: &Sides, seen: &mut Seen, rng: &mut StdRng) {
    let key = Some(s.keys["alice"].as_str());
    let mut ctx = BenchmarkContext::new("ctx-0");
    for (kind, set) in [(0, &mut ctx.datasets), (1, &mut ctx.models), (2, &mut ctx.metrics)] {
        let name = format!("alice/{}0", KINDS[kind]);
        let bytes = payload(kind, &name, 0);
        let http = s.app.send(Method::POST, "/v1/components", key, bytes.clone());
        let rec = s.direct.register(&bytes, "alice").unwrap();
        agree(0, "prelude register", Ok(Some(to_value(&rec))), &http);
        set.insert(rec.id.clone());
        seen.components.insert(rec.id, bytes);
    }
    let http = s.app.post_json("/v1/contexts", key, &ctx);
    agree(0, "prelude context", s.direct.put_context(&ctx, "alice").map(|_| Some(to_value(&ctx))), &http);
    seen.contexts.push(ctx.context_id.clone());
    let run = testing::complete_run(rng, &ctx, "alice");
    let http = s.app.post_json("/v1/runs", key, &run);
    agree(0, "prelude run", s.direct.put_run(&run, "alice").map(|_| Some(serde_json::json!({"run_id": run.run_id}))), &http);
    seen.runs.push(run.run_id);
}

fn run_case(seed: u64) {
    let dir = tempfile::tempdir().unwrap();
    let direct = Registry::open(dir.path(), Box::new(LocalSim::new())).unwrap();
    let app = App::new();
    let mut keys = BTreeMap::new();
    for u in USERS {
        direct.issue_key(u).unwrap();
        keys.insert(u, app.key(u));
    }
    let sides = Sides { direct, _direct_dir: dir, app, keys };
    let mut rng = StdRng::seed_from_u64(seed);
    let mut seen = Seen::default();
    prelude(&sides, &mut seen, &mut rng);
    for n in 0..OPS_PER_CASE {
        step(&sides, &mut seen, &mut rng, n);
    }
    assert_eq!(sides.direct.snapshot().unwrap(), sides.app.registry.snapshot().unwrap());
    assert!(sides.app.registry.audit().unwrap().is_clean());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn http_and_direct_calls_leave_identical_stores(seed in any::<u64>()) {
        run_case(seed);
    }
}
