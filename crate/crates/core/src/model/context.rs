use std::collections::{BTreeMap, BTreeSet};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::hyper::HyperparameterSetting;
use super::ids::ComponentId;
use super::profile::SystemProfile;
use crate::canonical;
use crate::error::ModelError;

/// A benchmark context: chosen datasets, models and metrics, plus the
/// hyperparameter settings to try for each model.
///
/// A model without an entry in `hyper_family` runs once per dataset with the
/// empty setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct BenchmarkContext {
    pub context_id: String,
    pub datasets: BTreeSet<ComponentId>,
    pub models: BTreeSet<ComponentId>,
    pub metrics: BTreeSet<ComponentId>,
    #[serde(default)]
    pub hyper_family: BTreeMap<ComponentId, Vec<HyperparameterSetting>>,
}

impl BenchmarkContext {
    pub fn new(context_id: impl Into<String>) -> Self {
        BenchmarkContext {
            context_id: context_id.into(),
            datasets: BTreeSet::new(),
            models: BTreeSet::new(),
            metrics: BTreeSet::new(),
            hyper_family: BTreeMap::new(),
        }
    }

    /// Structural invariants that do not need the registry.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.context_id.trim().is_empty() {
            return Err(ModelError::SchemaViolation("context_id is empty".into()));
        }
        if self.datasets.is_empty() {
            return Err(ModelError::EmptyFamily("datasets".into()));
        }
        if self.models.is_empty() {
            return Err(ModelError::EmptyFamily("models".into()));
        }
        if self.metrics.is_empty() {
            return Err(ModelError::EmptyFamily("metrics".into()));
        }
        for (model, settings) in &self.hyper_family {
            if !self.models.contains(model) {
                return Err(ModelError::SchemaViolation(format!(
                    "hyper_family names `{model}` which is not among the models"
                )));
            }
            if settings.is_empty() {
                return Err(ModelError::EmptyFamily(format!("hyper_family[{model}]")));
            }
            for s in settings {
                s.validate()?;
            }
        }
        Ok(())
    }

    /// Hyperparameter settings for `model`, with the empty-setting default.
    pub fn settings_for(&self, model: &ComponentId) -> Vec<HyperparameterSetting> {
        match self.hyper_family.get(model) {
            Some(list) if !list.is_empty() => list.clone(),
            _ => vec![HyperparameterSetting::empty()],
        }
    }

    /// Closed-form number of scenarios: `sum over models of |datasets| * |settings(m)|`.
    pub fn scenario_count(&self) -> usize {
        self.models
            .iter()
            .map(|m| self.datasets.len() * self.settings_for(m).len())
            .sum()
    }

    /// Every component the context references.
    pub fn components(&self) -> impl Iterator<Item = &ComponentId> {
        self.datasets.iter().chain(&self.models).chain(&self.metrics)
    }
}

/// One `(dataset, model, metrics, hyper)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct BenchmarkScenario {
    pub dataset: ComponentId,
    pub model: ComponentId,
    pub metrics: BTreeSet<ComponentId>,
    pub hyper: HyperparameterSetting,
}

impl BenchmarkScenario {
    pub fn key(&self) -> String {
        scenario_key(self)
    }
}

/// `dataset@v|model@v|<first 16 hex of sha256(canonical hyper)>`.
///
/// The metric set is deliberately not part of the key, so results recorded
/// under different metric sets still line up for virtual runs.
pub fn scenario_key(scenario: &BenchmarkScenario) -> String {
    let digest = canonical::sha256_hex(scenario.hyper.canonical());
    format!("{}|{}|{}", scenario.dataset, scenario.model, &digest[..16])
}

/// Expands a context into its scenarios, ordered by dataset id, model id,
/// then canonical hyper serialization.
pub fn expand_context(context: &BenchmarkContext) -> Result<Vec<BenchmarkScenario>, ModelError> {
    context.validate()?;
    let mut out = Vec::with_capacity(context.scenario_count());
    for dataset in &context.datasets {
        for model in &context.models {
            let mut settings: Vec<(String, HyperparameterSetting)> = context
                .settings_for(model)
                .into_iter()
                .map(|h| (h.canonical(), h))
                .collect();
            settings.sort_by(|a, b| a.0.cmp(&b.0));
            settings.dedup_by(|a, b| a.0 == b.0);
            for (_, hyper) in settings {
                out.push(BenchmarkScenario {
                    dataset: dataset.clone(),
                    model: model.clone(),
                    metrics: context.metrics.clone(),
                    hyper,
                });
            }
        }
    }
    Ok(out)
}

/// A context's scenarios bound to the machine that will run them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct InstrumentedContext {
    pub context: BenchmarkContext,
    pub profile: SystemProfile,
    pub scenarios: Vec<BenchmarkScenario>,
}

pub fn instrument(
    context: &BenchmarkContext,
    profile: &SystemProfile,
) -> Result<InstrumentedContext, ModelError> {
    Ok(InstrumentedContext {
        scenarios: expand_context(context)?,
        context: context.clone(),
        profile: profile.clone(),
    })
}
