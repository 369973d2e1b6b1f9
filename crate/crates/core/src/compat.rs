//! Component compatibility and the context-building suggestion engine.
//!
//! Ports match by [`DataRole`] alone. Each producer port feeds at most one
//! consumer port of a given component, so a metric that compares two graphs
//! needs two graph-valued producers (typically the model's prediction and
//! the dataset's ground truth). When several producers share a role, a
//! producer with the same port name is preferred; otherwise model outputs
//! are preferred over dataset ports, in declaration order.
//!
//! Metrics may draw inputs from the dataset as well as from the model.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::model::{
    ComponentId, DataRole, DatasetDescriptor, MetricDescriptor, ModelDescriptor, PortSpec, TaskKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum MissingReason {
    NoProducer { role: DataRole },
    TaskMismatch { expected: TaskKind, found: TaskKind },
}

/// A consumer port left without a producer, or a task conflict (reported
/// against the pseudo-port `task`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Missing {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consumer: Option<ComponentId>,
    pub port: String,
    #[serde(flatten)]
    pub reason: MissingReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Satisfied {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consumer: Option<ComponentId>,
    pub port: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub producer: Option<ComponentId>,
    pub producer_port: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CompatReport {
    pub compatible: bool,
    pub missing: Vec<Missing>,
    pub satisfied: Vec<Satisfied>,
}

impl CompatReport {
    fn finish(missing: Vec<Missing>, satisfied: Vec<Satisfied>) -> Self {
        CompatReport { compatible: missing.is_empty(), missing, satisfied }
    }

    /// The satisfied mappings whose consumer is `id`.
    pub fn inputs_of<'a>(&'a self, id: &'a ComponentId) -> impl Iterator<Item = &'a Satisfied> + 'a {
        self.satisfied.iter().filter(move |s| s.consumer.as_ref() == Some(id))
    }
}

struct Source<'a> {
    component: Option<&'a ComponentId>,
    ports: &'a [PortSpec],
}

fn match_ports(
    consumer: Option<&ComponentId>,
    wanted: &[PortSpec],
    sources: &[Source<'_>],
    missing: &mut Vec<Missing>,
    satisfied: &mut Vec<Satisfied>,
) {
    let mut used: Vec<Vec<bool>> = sources.iter().map(|s| vec![false; s.ports.len()]).collect();
    let mut assigned: Vec<Option<(usize, usize)>> = vec![None; wanted.len()];

    // Required ports claim producers before optional ones; within each group
    // a same-named producer wins over a merely same-role one.
    for required_pass in [true, false] {
        for by_name in [true, false] {
            for (wi, want) in wanted.iter().enumerate() {
                if want.required != required_pass || assigned[wi].is_some() {
                    continue;
                }
                'search: for (si, src) in sources.iter().enumerate() {
                    for (pi, p) in src.ports.iter().enumerate() {
                        if used[si][pi] || p.data_role != want.data_role {
                            continue;
                        }
                        if by_name && p.port_name != want.port_name {
                            continue;
                        }
                        used[si][pi] = true;
                        assigned[wi] = Some((si, pi));
                        break 'search;
                    }
                }
            }
        }
    }

    for (want, slot) in wanted.iter().zip(&assigned) {
        match slot {
            Some((si, pi)) => satisfied.push(Satisfied {
                consumer: consumer.cloned(),
                port: want.port_name.clone(),
                producer: sources[*si].component.cloned(),
                producer_port: sources[*si].ports[*pi].port_name.clone(),
            }),
            None if want.required => missing.push(Missing {
                consumer: consumer.cloned(),
                port: want.port_name.clone(),
                reason: MissingReason::NoProducer { role: want.data_role },
            }),
            None => {}
        }
    }
}

/// Whether `provided` ports can feed every required port in `required`.
pub fn ports_satisfied(provided: &[PortSpec], required: &[PortSpec]) -> CompatReport {
    let mut missing = Vec::new();
    let mut satisfied = Vec::new();
    match_ports(None, required, &[Source { component: None, ports: provided }], &mut missing, &mut satisfied);
    CompatReport::finish(missing, satisfied)
}

/// Compatibility of one `(dataset, model, metric set)` combination.
pub fn check_scenario(
    dataset: &DatasetDescriptor,
    model: &ModelDescriptor,
    metrics: &[&MetricDescriptor],
) -> CompatReport {
    check_partial(Some(dataset), Some(model), metrics)
}

/// Like [`check_scenario`], but an absent dataset or model is a wildcard:
/// any check that depends on it is assumed to pass.
fn check_partial(
    dataset: Option<&DatasetDescriptor>,
    model: Option<&ModelDescriptor>,
    metrics: &[&MetricDescriptor],
) -> CompatReport {
    let mut missing = Vec::new();
    let mut satisfied = Vec::new();

    if let (Some(d), Some(m)) = (dataset, model) {
        match_ports(
            Some(&m.id),
            &m.signature.inputs,
            &[Source { component: Some(&d.id), ports: &d.provided_ports }],
            &mut missing,
            &mut satisfied,
        );
    }

    let task = model.map(|m| m.signature.task).or_else(|| metrics.first().map(|a| a.signature.task));
    for metric in metrics {
        if let Some(expected) = task {
            if metric.signature.task != expected {
                missing.push(Missing {
                    consumer: Some(metric.id.clone()),
                    port: "task".into(),
                    reason: MissingReason::TaskMismatch { expected, found: metric.signature.task },
                });
            }
        }
        if let (Some(d), Some(m)) = (dataset, model) {
            match_ports(
                Some(&metric.id),
                &metric.signature.inputs,
                &[
                    Source { component: Some(&m.id), ports: &m.signature.outputs },
                    Source { component: Some(&d.id), ports: &d.provided_ports },
                ],
                &mut missing,
                &mut satisfied,
            );
        }
    }
    CompatReport::finish(missing, satisfied)
}

/// Components by kind: either the user's current picks or the candidates
/// on offer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Selection {
    #[serde(default)]
    pub datasets: Vec<DatasetDescriptor>,
    #[serde(default)]
    pub models: Vec<ModelDescriptor>,
    #[serde(default)]
    pub metrics: Vec<MetricDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Rejected {
    pub id: ComponentId,
    pub reasons: Vec<Missing>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct KindSuggestion {
    pub suitable: Vec<ComponentId>,
    pub incompatible: Vec<Rejected>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Suggestion {
    pub datasets: KindSuggestion,
    pub models: KindSuggestion,
    pub metrics: KindSuggestion,
}

/// Ways to fill one kind: the fixed chosen set, or one pool member at a
/// time when nothing is chosen yet. An empty inner list is a wildcard.
fn options<'a, T>(chosen: &[&'a T], pool: &'a [T]) -> Vec<Vec<&'a T>> {
    if !chosen.is_empty() {
        vec![chosen.to_vec()]
    } else if pool.is_empty() {
        vec![Vec::new()]
    } else {
        pool.iter().map(|x| vec![x]).collect()
    }
}

/// `Ok` when some completion of the selection makes every
/// `(dataset, model)` pair compatible with the full metric set; otherwise
/// the reasons from the closest completion.
fn feasible(
    datasets: &[&DatasetDescriptor],
    models: &[&ModelDescriptor],
    metrics: &[&MetricDescriptor],
    pool: &Selection,
) -> Result<(), Vec<Missing>> {
    let mut best: Option<Vec<Missing>> = None;
    for dopt in options(datasets, &pool.datasets) {
        for mopt in options(models, &pool.models) {
            for aopt in options(metrics, &pool.metrics) {
                let ds: Vec<Option<&DatasetDescriptor>> =
                    if dopt.is_empty() { vec![None] } else { dopt.iter().map(|d| Some(*d)).collect() };
                let ms: Vec<Option<&ModelDescriptor>> =
                    if mopt.is_empty() { vec![None] } else { mopt.iter().map(|m| Some(*m)).collect() };
                let mut missing = Vec::new();
                for d in &ds {
                    for m in &ms {
                        missing.extend(check_partial(*d, *m, &aopt).missing);
                    }
                }
                if missing.is_empty() {
                    return Ok(());
                }
                missing.dedup();
                if best.as_ref().is_none_or(|b| missing.len() < b.len()) {
                    best = Some(missing);
                }
            }
        }
    }
    Err(best.unwrap_or_default())
}

fn classify<T>(
    candidates: &[T],
    id_of: impl Fn(&T) -> &ComponentId,
    mut check: impl FnMut(&T) -> Result<(), Vec<Missing>>,
) -> KindSuggestion {
    let mut out = KindSuggestion::default();
    for c in candidates {
        match check(c) {
            Ok(()) => out.suitable.push(id_of(c).clone()),
            Err(reasons) => out.incompatible.push(Rejected { id: id_of(c).clone(), reasons }),
        }
    }
    out.suitable.sort();
    out.suitable.dedup();
    out.incompatible.sort_by(|a, b| a.id.cmp(&b.id));
    out.incompatible.dedup_by(|a, b| a.id == b.id);
    out
}

/// Partitions each kind of candidate into suitable and incompatible given
/// what the user has already chosen.
///
/// A candidate is suitable when adding it to the chosen set still leaves a
/// way to complete the context (using the candidate pool for kinds with
/// nothing chosen) such that every scenario of that context is compatible.
/// Adding chosen components only ever shrinks the suitable sets.
pub fn suggest(chosen: &Selection, candidates: &Selection) -> Suggestion {
    let ds: Vec<&DatasetDescriptor> = chosen.datasets.iter().collect();
    let ms: Vec<&ModelDescriptor> = chosen.models.iter().collect();
    let xs: Vec<&MetricDescriptor> = chosen.metrics.iter().collect();

    let datasets = classify(&candidates.datasets, |d| &d.id, |d| {
        let mut with = ds.clone();
        if !with.iter().any(|x| x.id == d.id) {
            with.push(d);
        }
        feasible(&with, &ms, &xs, candidates)
    });
    let models = classify(&candidates.models, |m| &m.id, |m| {
        let mut with = ms.clone();
        if !with.iter().any(|x| x.id == m.id) {
            with.push(m);
        }
        feasible(&ds, &with, &xs, candidates)
    });
    let metrics = classify(&candidates.metrics, |a| &a.id, |a| {
        let mut with = xs.clone();
        if !with.iter().any(|x| x.id == a.id) {
            with.push(a);
        }
        feasible(&ds, &ms, &with, candidates)
    });
    Suggestion { datasets, models, metrics }
}
