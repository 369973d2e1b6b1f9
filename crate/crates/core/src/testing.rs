//! Random instance generators for property tests and acceptance checks.
//!
//! Every generator draws from a caller-supplied RNG, so a seeded
//! `StdRng` reproduces an instance exactly.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::analysis::{Cell, RunTable};
use crate::compat::Selection;
use crate::model::*;

const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "scm", "pc", "ges", "notears", "shd", "pehe", "x_1", "y-2"];
const ROLES: &[DataRole] = &[
    DataRole::TabularObservations,
    DataRole::CausalGraph,
    DataRole::TreatmentEffectEstimates,
    DataRole::CounterfactualOutcomes,
    DataRole::ExplanationArtifact,
];
const TASKS: &[TaskKind] = &[TaskKind::CausalDiscovery, TaskKind::CausalEffectEstimation, TaskKind::CausalInterpretability];

pub fn word<R: Rng>(rng: &mut R) -> String {
    (*WORDS.choose(rng).unwrap()).to_string()
}

pub fn text<R: Rng>(rng: &mut R) -> String {
    let n = rng.random_range(0..12);
    (0..n)
        .map(|_| *['a', 'Z', '0', ' ', '"', '\\', '/', 'é', '\n', '{', '✓'].choose(rng).unwrap())
        .collect()
}

pub fn finite_f64<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(-1e6..1e6),
        1 => rng.random_range(-3i32..4) as f64,
        2 => f64::from_bits(rng.random::<u64>() & !(0x7ffu64 << 52) | ((rng.random_range(1..2046u64)) << 52)),
        _ => rng.random::<f64>(),
    }
}

pub fn component_id<R: Rng>(rng: &mut R) -> ComponentId {
    ComponentId::new(format!("{}/{}", word(rng), word(rng)), rng.random_range(1..6)).unwrap()
}

pub fn scalar<R: Rng>(rng: &mut R) -> Scalar {
    match rng.random_range(0..4) {
        0 => Scalar::Bool(rng.random()),
        1 => Scalar::Int(rng.random_range(-1_000_000..1_000_000)),
        2 => Scalar::Float(finite_f64(rng)),
        _ => Scalar::Str(text(rng)),
    }
}

pub fn hyper<R: Rng>(rng: &mut R) -> HyperparameterSetting {
    (0..rng.random_range(0..4)).map(|_| (word(rng), scalar(rng))).collect()
}

pub fn port<R: Rng>(rng: &mut R, role_pool: usize) -> PortSpec {
    let role = ROLES[rng.random_range(0..role_pool.clamp(1, ROLES.len()))];
    let name = ["obs", "graph", "effects", "cf", "expl", "extra"][rng.random_range(0..6)].to_string();
    PortSpec { port_name: name, data_role: role, required: rng.random_bool(0.8) }
}

fn unique_ports<R: Rng>(rng: &mut R, count: std::ops::Range<usize>, role_pool: usize) -> Vec<PortSpec> {
    let n = rng.random_range(count);
    let mut out: Vec<PortSpec> = Vec::new();
    for _ in 0..n {
        let p = port(rng, role_pool);
        if !out.iter().any(|q| q.port_name == p.port_name) {
            out.push(p);
        }
    }
    out
}

pub fn param_spec<R: Rng>(rng: &mut R) -> ParamSpec {
    match rng.random_range(0..3) {
        0 => ParamSpec { param_type: ParamType::Float, default: Scalar::Float(0.5), range: Some([0.0, 1.0]), allowed: None },
        1 => ParamSpec {
            param_type: ParamType::Int,
            default: Scalar::Int(3),
            range: None,
            allowed: Some(vec![Scalar::Int(1), Scalar::Int(3)]),
        },
        _ => ParamSpec { param_type: ParamType::Bool, default: Scalar::Bool(rng.random()), range: None, allowed: None },
    }
}

pub fn dataset<R: Rng>(rng: &mut R, role_pool: usize) -> DatasetDescriptor {
    let ports = unique_ports(rng, 1..4, role_pool);
    DatasetDescriptor {
        id: component_id(rng),
        files: ports
            .iter()
            .map(|p| DatasetFile {
                name: format!("{}.csv", p.port_name),
                content_hash: crate::canonical::sha256_hex(p.port_name.as_bytes()),
                byte_size: rng.random_range(1..10_000),
            })
            .collect(),
        config: (0..rng.random_range(0..3)).map(|_| (word(rng), scalar(rng))).collect(),
        provided_ports: ports,
    }
}

pub fn model<R: Rng>(rng: &mut R, role_pool: usize) -> ModelDescriptor {
    ModelDescriptor {
        id: component_id(rng),
        signature: SignatureSpec {
            task: *TASKS.choose(rng).unwrap(),
            inputs: unique_ports(rng, 0..3, role_pool),
            outputs: unique_ports(rng, 1..3, role_pool),
        },
        entrypoint: "run.py".into(),
        hyperparameter_schema: (0..rng.random_range(0..3)).map(|_| (word(rng), param_spec(rng))).collect(),
    }
}

pub fn metric<R: Rng>(rng: &mut R, role_pool: usize) -> MetricDescriptor {
    MetricDescriptor {
        id: component_id(rng),
        signature: SignatureSpec {
            task: *TASKS.choose(rng).unwrap(),
            inputs: unique_ports(rng, 1..3, role_pool),
            outputs: vec![PortSpec::required("value", DataRole::Scalar)],
        },
        direction: if rng.random() { MetricDirection::HigherBetter } else { MetricDirection::LowerBetter },
        entrypoint: "metric.py".into(),
    }
}

pub fn descriptor<R: Rng>(rng: &mut R) -> Descriptor {
    match rng.random_range(0..3) {
        0 => Descriptor::Dataset(dataset(rng, ROLES.len())),
        1 => Descriptor::Model(model(rng, ROLES.len())),
        _ => Descriptor::Metric(metric(rng, ROLES.len())),
    }
}

/// A pool of signature sets over a few roles and tasks, so compatible and
/// incompatible combinations both occur often.
pub fn selection<R: Rng>(rng: &mut R) -> Selection {
    let roles = rng.random_range(2..=3);
    let distinct = |rng: &mut R, kind: u8| {
        let n = rng.random_range(1..5);
        (0..n)
            .map(|i| {
                let name = format!("k{kind}/c{i}");
                ComponentId::new(name, rng.random_range(1..3)).unwrap()
            })
            .collect::<Vec<_>>()
    };
    let dids = distinct(rng, 0);
    let mids = distinct(rng, 1);
    let aids = distinct(rng, 2);
    let task = |rng: &mut R| TASKS[rng.random_range(0..2)];
    Selection {
        datasets: dids.into_iter().map(|id| DatasetDescriptor { id, ..dataset(rng, roles) }).collect(),
        models: mids
            .into_iter()
            .map(|id| {
                let mut m = model(rng, roles);
                m.id = id;
                m.signature.task = task(rng);
                m
            })
            .collect(),
        metrics: aids
            .into_iter()
            .map(|id| {
                let mut a = metric(rng, roles);
                a.id = id;
                a.signature.task = task(rng);
                a
            })
            .collect(),
    }
}

/// A valid context with 1..=max datasets, models, metrics and settings per
/// model. Settings within one model are distinct.
pub fn context<R: Rng>(rng: &mut R, max: usize) -> BenchmarkContext {
    let mut ctx = BenchmarkContext::new(format!("ctx-{}", rng.random::<u32>()));
    let ids = |rng: &mut R, prefix: &str| -> BTreeSet<ComponentId> {
        let n = rng.random_range(1..=max);
        (0..n).map(|i| ComponentId::new(format!("{prefix}/c{i}"), rng.random_range(1..4)).unwrap()).collect()
    };
    ctx.datasets = ids(rng, "d");
    ctx.models = ids(rng, "m");
    ctx.metrics = ids(rng, "a");
    for m in ctx.models.clone() {
        let n = rng.random_range(1..=max);
        let settings = (0..n).map(|i| hyper(rng).with("__i", i as i64)).collect();
        ctx.hyper_family.insert(m, settings);
    }
    ctx
}

/// The closed-form scenario count `|D| * sum_m |H(m)|`.
pub fn closed_form_count(ctx: &BenchmarkContext) -> usize {
    ctx.datasets.len() * ctx.models.iter().map(|m| ctx.hyper_family.get(m).map_or(1, Vec::len)).sum::<usize>()
}

pub fn profile<R: Rng>(rng: &mut R) -> SystemProfile {
    let runtimes: BTreeMap<String, String> =
        (0..rng.random_range(0..3)).map(|_| (word(rng), format!("{}.{}", rng.random_range(0..4), rng.random_range(0..20)))).collect();
    SystemProfile::new(
        text(rng),
        rng.random_range(1..128),
        rng.random_range(1u64 << 20..1u64 << 40),
        rng.random_bool(0.3).then(|| text(rng)),
        text(rng),
        runtimes,
    )
}

pub fn scenario<R: Rng>(rng: &mut R) -> BenchmarkScenario {
    BenchmarkScenario {
        dataset: component_id(rng),
        model: component_id(rng),
        metrics: (0..rng.random_range(1..3)).map(|_| component_id(rng)).collect(),
        hyper: hyper(rng),
    }
}

pub fn result<R: Rng>(rng: &mut R) -> ScenarioResult {
    let scenario = scenario(rng);
    let status = [ScenarioStatus::Ok, ScenarioStatus::ModelFailed, ScenarioStatus::MetricFailed, ScenarioStatus::Timeout]
        [rng.random_range(0..4)];
    ScenarioResult {
        accuracy: scenario
            .metrics
            .iter()
            .filter_map(|m| if rng.random_bool(0.8) { Some((m.clone(), finite_f64(rng))) } else { None })
            .collect(),
        scenario,
        status,
        timing: Timing {
            wall_time_s: rng.random_range(0.0..100.0),
            cpu_time_s: rng.random_range(0.0..100.0),
            gpu_time_s: rng.random_bool(0.3).then(|| rng.random_range(0.0..10.0)),
        },
        resources: Resources {
            peak_cpu_memory_bytes: rng.random_range(0..1u64 << 36),
            peak_gpu_memory_bytes: rng.random_bool(0.3).then(|| rng.random_range(0..1u64 << 34)),
        },
        log_excerpt: text(rng),
    }
}

pub fn timestamp<R: Rng>(rng: &mut R) -> DateTime<Utc> {
    Utc.timestamp_millis_opt(rng.random_range(0..4_000_000_000_000i64)).unwrap()
}

pub fn run<R: Rng>(rng: &mut R) -> BenchmarkRun {
    let started_at = timestamp(rng);
    BenchmarkRun {
        run_id: format!("run-{}", rng.random::<u64>()),
        context_id: format!("ctx-{}", rng.random::<u32>()),
        profile: profile(rng),
        results: (0..rng.random_range(0..4)).map(|_| result(rng)).collect(),
        executed_by: word(rng),
        started_at,
        finished_at: started_at + chrono::Duration::milliseconds(rng.random_range(0..1_000_000)),
        visibility: if rng.random() { Visibility::Public } else { Visibility::Private },
        minted_identifier: rng.random_bool(0.3).then(|| format!("10.70000/cb.{}", rng.random::<u32>())),
    }
}

pub fn cell<R: Rng>(rng: &mut R) -> Cell {
    match rng.random_range(0..5) {
        0 => Cell::Null,
        1 => Cell::Bool(rng.random()),
        2 | 3 => Cell::Num(rng.random_range(-5i32..6) as f64),
        _ => Cell::Text(["m1", "m2", "m3"][rng.random_range(0..3)].into()),
    }
}

/// A small table with factor columns `f0..f1` and outcome columns `y0..y1`.
pub fn table<R: Rng>(rng: &mut R) -> RunTable {
    let n = rng.random_range(0..20);
    let factor = |rng: &mut R| -> Vec<Cell> { (0..n).map(|_| Cell::Text(["a", "b", "c"][rng.random_range(0..3)].into())).collect() };
    let outcome = |rng: &mut R| -> Vec<Cell> {
        (0..n).map(|_| if rng.random_bool(0.2) { Cell::Null } else { Cell::Num(rng.random_range(-10i32..10) as f64) }).collect()
    };
    let (f0, f1, y0, y1) = (factor(rng), factor(rng), outcome(rng), outcome(rng));
    RunTable::from_columns(vec![("f0", f0), ("f1", f1), ("y0", y0), ("y1", y1)], &["y0", "y1"])
}

/// A private run that validates cleanly against `ctx`: one `ok` result per
/// expanded scenario with random timings and accuracies.
pub fn complete_run<R: Rng>(rng: &mut R, ctx: &BenchmarkContext, executed_by: &str) -> BenchmarkRun {
    let started_at = timestamp(rng);
    let results = expand_context(ctx)
        .expect("context is valid")
        .into_iter()
        .map(|scenario| ScenarioResult {
            accuracy: scenario.metrics.iter().map(|m| (m.clone(), finite_f64(rng))).collect(),
            scenario,
            status: ScenarioStatus::Ok,
            timing: Timing { wall_time_s: rng.random_range(0.0..10.0), cpu_time_s: rng.random_range(0.0..10.0), gpu_time_s: None },
            resources: Resources { peak_cpu_memory_bytes: rng.random_range(1..1u64 << 32), peak_gpu_memory_bytes: None },
            log_excerpt: String::new(),
        })
        .collect();
    BenchmarkRun {
        run_id: format!("run-{:016x}", rng.random::<u64>()),
        context_id: ctx.context_id.clone(),
        profile: profile(rng),
        results,
        executed_by: executed_by.to_string(),
        started_at,
        finished_at: started_at + chrono::Duration::milliseconds(rng.random_range(0..1_000_000)),
        visibility: Visibility::Private,
        minted_identifier: None,
    }
}
