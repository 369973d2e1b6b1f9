use std::collections::{BTreeMap, BTreeSet};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::context::{expand_context, scenario_key, BenchmarkContext};
use super::results::{BenchmarkRun, ScenarioStatus, Visibility};

/// One way a run can fail to match its context or the result-shape rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum Violation {
    InvalidContext { detail: String },
    ContextMismatch { expected: String, found: String },
    MissingScenario { scenario_key: String },
    UnexpectedScenario { scenario_key: String },
    DuplicateScenario { scenario_key: String },
    MetricSetMismatch { scenario_key: String },
    MissingMetric { scenario_key: String, metric: String },
    UnexpectedMetric { scenario_key: String, metric: String },
    InvalidAccuracy { scenario_key: String, metric: String },
    InvalidTiming { scenario_key: String, field: String },
    ClockOrder,
    ProfileHashMismatch,
    InvalidProfile,
    VisibilityMismatch,
    EmptyField { field: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a run against its context and the result-shape invariants.
///
/// Violations are reported as data; nothing here fails.
pub fn validate_run(run: &BenchmarkRun, context: &BenchmarkContext) -> ValidationReport {
    let mut v = Vec::new();

    if run.run_id.trim().is_empty() {
        v.push(Violation::EmptyField { field: "run_id".into() });
    }
    if run.executed_by.trim().is_empty() {
        v.push(Violation::EmptyField { field: "executed_by".into() });
    }
    if run.context_id != context.context_id {
        v.push(Violation::ContextMismatch {
            expected: context.context_id.clone(),
            found: run.context_id.clone(),
        });
    }
    if run.finished_at < run.started_at {
        v.push(Violation::ClockOrder);
    }
    if run.profile.physical_cores < 1 {
        v.push(Violation::InvalidProfile);
    }
    if !run.profile.hash_is_consistent() {
        v.push(Violation::ProfileHashMismatch);
    }
    if run.minted_identifier.is_some() != (run.visibility == Visibility::Public) {
        v.push(Violation::VisibilityMismatch);
    }

    let expected = match expand_context(context) {
        Ok(s) => s,
        Err(e) => {
            v.push(Violation::InvalidContext { detail: e.to_string() });
            Vec::new()
        }
    };
    let expected_keys: BTreeSet<String> = expected.iter().map(scenario_key).collect();

    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for result in &run.results {
        let key = scenario_key(&result.scenario);
        *seen.entry(key.clone()).or_default() += 1;

        if !expected_keys.contains(&key) {
            v.push(Violation::UnexpectedScenario { scenario_key: key.clone() });
        }
        if result.scenario.metrics != context.metrics {
            v.push(Violation::MetricSetMismatch { scenario_key: key.clone() });
        }
        if result.status == ScenarioStatus::Ok {
            for metric in &result.scenario.metrics {
                if !result.accuracy.contains_key(metric) {
                    v.push(Violation::MissingMetric {
                        scenario_key: key.clone(),
                        metric: metric.to_string(),
                    });
                }
            }
        }
        for (metric, value) in &result.accuracy {
            if !result.scenario.metrics.contains(metric) {
                v.push(Violation::UnexpectedMetric {
                    scenario_key: key.clone(),
                    metric: metric.to_string(),
                });
            }
            if !value.is_finite() {
                v.push(Violation::InvalidAccuracy {
                    scenario_key: key.clone(),
                    metric: metric.to_string(),
                });
            }
        }
        let t = &result.timing;
        let timings = [
            ("wall_time_s", Some(t.wall_time_s)),
            ("cpu_time_s", Some(t.cpu_time_s)),
            ("gpu_time_s", t.gpu_time_s),
        ];
        for (field, value) in timings {
            if let Some(x) = value {
                if !(x.is_finite() && x >= 0.0) {
                    v.push(Violation::InvalidTiming {
                        scenario_key: key.clone(),
                        field: field.into(),
                    });
                }
            }
        }
    }
    for (key, count) in &seen {
        if *count > 1 {
            v.push(Violation::DuplicateScenario { scenario_key: key.clone() });
        }
    }
    for key in &expected_keys {
        if !seen.contains_key(key) {
            v.push(Violation::MissingScenario { scenario_key: key.clone() });
        }
    }

    ValidationReport { violations: v }
}
