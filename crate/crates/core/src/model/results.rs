use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::context::BenchmarkScenario;
use super::ids::ComponentId;
use super::profile::SystemProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioStatus {
    Ok,
    ModelFailed,
    MetricFailed,
    Timeout,
}

impl ScenarioStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioStatus::Ok => "ok",
            ScenarioStatus::ModelFailed => "model-failed",
            ScenarioStatus::MetricFailed => "metric-failed",
            ScenarioStatus::Timeout => "timeout",
        }
    }
}

/// Timing values `T`, in seconds. GPU time is absent, not zero, when no GPU
/// was measured.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
pub struct Timing {
    pub wall_time_s: f64,
    pub cpu_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gpu_time_s: Option<f64>,
}

/// Resource usage `S`, in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
pub struct Resources {
    pub peak_cpu_memory_bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_gpu_memory_bytes: Option<u64>,
}

/// The recorded outcome of one scenario: accuracy `A`, timing `T`, and
/// resources `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ScenarioResult {
    pub scenario: BenchmarkScenario,
    pub status: ScenarioStatus,
    #[serde(default)]
    pub accuracy: BTreeMap<ComponentId, f64>,
    pub timing: Timing,
    pub resources: Resources,
    #[serde(default)]
    pub log_excerpt: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Private,
    Public,
}

impl Visibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Visibility::Private => "private",
            Visibility::Public => "public",
        }
    }
}

/// The recorded outputs of executing one instrumented context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct BenchmarkRun {
    pub run_id: String,
    pub context_id: String,
    pub profile: SystemProfile,
    pub results: Vec<ScenarioResult>,
    pub executed_by: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub visibility: Visibility,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minted_identifier: Option<String>,
}

impl BenchmarkRun {
    /// Every component version the run's results reference.
    pub fn referenced_components(&self) -> std::collections::BTreeSet<ComponentId> {
        let mut out = std::collections::BTreeSet::new();
        for r in &self.results {
            out.insert(r.scenario.dataset.clone());
            out.insert(r.scenario.model.clone());
            out.extend(r.scenario.metrics.iter().cloned());
        }
        out
    }
}
