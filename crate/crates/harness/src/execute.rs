//! Executing instrumented contexts.
//!
//! Each execution gets its own directory under the working-directory root,
//! named by the run id:
//!
//! ```text
//! <root>/<run_id>/components/<owner>__<slug>@<v>/   unpacked payloads
//! <root>/<run_id>/scenarios/<nnnn>/                 one per scenario
//!     data/            copies of the dataset files
//!     outputs/         model outputs
//!     metrics/<k>/     one working directory per metric
//! ```
//!
//! Plugins only ever see copies, never the registry's blobs. Scenario
//! directories are removed when the scenario succeeds and kept otherwise.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use causalbench_core::compat::{check_scenario, CompatReport};
use causalbench_core::model::*;
use causalbench_registry::archive::{self, pack_dir};
use causalbench_registry::Registry;
use chrono::Utc;

use crate::error::{HarnessError, Result};
use crate::measure::{measure_execution, push_line, ExecutionLimits, ExitStatus};
use crate::plugin::{command_for, find_output, read_metric_result, write_invocation, PluginInputs, OUTPUTS_DIR};

/// Where component descriptors and payload archives come from.
pub trait ComponentSource {
    fn fetch(&self, id: &ComponentId) -> std::result::Result<(Descriptor, Vec<u8>), String>;
}

/// Reads components straight from a registry as `principal`.
pub struct RegistrySource<'a> {
    pub registry: &'a Registry,
    pub principal: Option<&'a str>,
}

impl ComponentSource for RegistrySource<'_> {
    fn fetch(&self, id: &ComponentId) -> std::result::Result<(Descriptor, Vec<u8>), String> {
        let (record, bytes) = self.registry.fetch(id, self.principal).map_err(|e| e.to_string())?;
        Ok((record.descriptor, bytes))
    }
}

/// Components packed from local directories, keyed by the id in their
/// manifest.
#[derive(Debug, Default)]
pub struct LocalSource {
    components: BTreeMap<ComponentId, (Descriptor, Vec<u8>)>,
}

impl LocalSource {
    pub fn new() -> Self {
        LocalSource::default()
    }

    /// Packs a component directory (one with a `manifest.json`).
    pub fn add_dir(&mut self, dir: &Path) -> Result<ComponentId> {
        let (manifest, bytes) = pack_dir(dir).map_err(|e| HarnessError::Component {
            id: dir.display().to_string(),
            detail: e.to_string(),
        })?;
        let id = manifest.descriptor.id().clone();
        self.components.insert(id.clone(), (manifest.descriptor, bytes));
        Ok(id)
    }

    pub fn descriptor(&self, id: &ComponentId) -> Option<&Descriptor> {
        self.components.get(id).map(|(d, _)| d)
    }
}

impl ComponentSource for LocalSource {
    fn fetch(&self, id: &ComponentId) -> std::result::Result<(Descriptor, Vec<u8>), String> {
        self.components.get(id).cloned().ok_or_else(|| format!("{id} is not available locally"))
    }
}

/// Component payloads unpacked on disk.
pub struct Materialized {
    components: BTreeMap<ComponentId, (Descriptor, PathBuf)>,
}

impl Materialized {
    pub fn load<'a>(
        source: &dyn ComponentSource,
        ids: impl IntoIterator<Item = &'a ComponentId>,
        dir: &Path,
    ) -> Result<Materialized> {
        let mut components = BTreeMap::new();
        for id in ids {
            let err = |detail: String| HarnessError::Component { id: id.to_string(), detail };
            let (descriptor, bytes) = source.fetch(id).map_err(err)?;
            if descriptor.id() != id {
                return Err(err(format!("descriptor describes {}", descriptor.id())));
            }
            let unpacked = archive::unpack(&bytes).map_err(|e| err(e.to_string()))?;
            let target = dir.join(format!("{}@{}", id.name().replace('/', "__"), id.version()));
            unpacked.extract_to(&target).map_err(|e| err(e.to_string()))?;
            components.insert(id.clone(), (descriptor, target));
        }
        Ok(Materialized { components })
    }

    fn get(&self, id: &ComponentId) -> Result<&(Descriptor, PathBuf)> {
        self.components
            .get(id)
            .ok_or_else(|| HarnessError::Component { id: id.to_string(), detail: "not materialized".into() })
    }

    fn dataset(&self, id: &ComponentId) -> Result<(&DatasetDescriptor, &Path)> {
        let (d, p) = self.get(id)?;
        let d = d.as_dataset().ok_or_else(|| wrong_kind(id, "dataset"))?;
        Ok((d, p))
    }

    fn model(&self, id: &ComponentId) -> Result<(&ModelDescriptor, &Path)> {
        let (d, p) = self.get(id)?;
        let d = d.as_model().ok_or_else(|| wrong_kind(id, "model"))?;
        Ok((d, p))
    }

    fn metric(&self, id: &ComponentId) -> Result<(&MetricDescriptor, &Path)> {
        let (d, p) = self.get(id)?;
        let d = d.as_metric().ok_or_else(|| wrong_kind(id, "metric"))?;
        Ok((d, p))
    }

    /// The compatibility report for `scenario`, or an error if it is not
    /// compatible.
    pub fn check(&self, scenario: &BenchmarkScenario) -> Result<CompatReport> {
        let (d, _) = self.dataset(&scenario.dataset)?;
        let (m, _) = self.model(&scenario.model)?;
        let metrics = scenario.metrics.iter().map(|id| self.metric(id).map(|(a, _)| a)).collect::<Result<Vec<_>>>()?;
        let report = check_scenario(d, m, &metrics);
        if !report.compatible {
            let detail = report
                .missing
                .iter()
                .map(|miss| match &miss.consumer {
                    Some(c) => format!("{c}:{}", miss.port),
                    None => miss.port.clone(),
                })
                .collect::<Vec<_>>()
                .join(", ");
            return Err(HarnessError::IncompatibleScenario { scenario_key: scenario.key(), detail: format!("unsatisfied {detail}") });
        }
        Ok(report)
    }
}

fn wrong_kind(id: &ComponentId, expected: &str) -> HarnessError {
    HarnessError::Component { id: id.to_string(), detail: format!("is not a {expected}") }
}

pub struct Harness {
    limits: ExecutionLimits,
}

impl Harness {
    pub fn new(limits: ExecutionLimits) -> Result<Harness> {
        limits.validate()?;
        Ok(Harness { limits })
    }

    pub fn limits(&self) -> &ExecutionLimits {
        &self.limits
    }

    /// Runs one scenario in `workdir`, which is recreated empty. Plugin
    /// failures become statuses; only compatibility and I/O problems are
    /// errors. The directory is removed if the scenario succeeds.
    pub fn run_scenario(&self, scenario: &BenchmarkScenario, components: &Materialized, workdir: &Path) -> Result<ScenarioResult> {
        let report = components.check(scenario)?;
        let (dataset, dataset_dir) = components.dataset(&scenario.dataset)?;
        let (model, model_dir) = components.model(&scenario.model)?;

        if workdir.exists() {
            std::fs::remove_dir_all(workdir)?;
        }
        let data_dir = workdir.join("data");
        let output_dir = workdir.join(OUTPUTS_DIR);
        std::fs::create_dir_all(&data_dir)?;
        std::fs::create_dir_all(&output_dir)?;
        let mut dataset_paths = BTreeMap::new();
        for port in &dataset.provided_ports {
            if let Some(file) = dataset.file_for_port(&port.port_name) {
                let target = data_dir.join(&file.name);
                if let Some(parent) = target.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                std::fs::copy(dataset_dir.join(&file.name), &target)?;
                let mut perms = std::fs::metadata(&target)?.permissions();
                perms.set_readonly(true);
                std::fs::set_permissions(&target, perms)?;
                dataset_paths.insert(port.port_name.clone(), std::path::absolute(&target)?);
            }
        }

        let model_inputs = PluginInputs {
            inputs: report
                .inputs_of(&model.id)
                .filter_map(|s| dataset_paths.get(&s.producer_port).map(|p| (s.port.clone(), p.clone())))
                .collect(),
            output_dir: Some(std::path::absolute(&output_dir)?),
            ground_truth: Default::default(),
        };
        write_invocation(workdir, &model_inputs, &scenario.hyper)?;
        let entry = std::path::absolute(model_dir.join(&model.entrypoint))?;
        let measured = measure_execution(&command_for(&entry, workdir), &self.limits)?;
        let mut log = measured.log_excerpt.clone();
        let mut accuracy = BTreeMap::new();

        let status = match measured.status {
            ExitStatus::Timeout => ScenarioStatus::Timeout,
            s if !s.success() => {
                push_line(&mut log, &format!("model {} failed: {s}", model.id));
                ScenarioStatus::ModelFailed
            }
            _ => {
                let missing: Vec<&str> = model
                    .signature
                    .outputs
                    .iter()
                    .filter(|p| p.required && find_output(&output_dir, &p.port_name).is_none())
                    .map(|p| p.port_name.as_str())
                    .collect();
                if !missing.is_empty() {
                    push_line(&mut log, &format!("model {} wrote no output for {}", model.id, missing.join(", ")));
                    ScenarioStatus::ModelFailed
                } else {
                    let mut failed = false;
                    for (k, metric_id) in scenario.metrics.iter().enumerate() {
                        match self.run_metric(metric_id, components, &report, &model.id, &output_dir, &dataset_paths, &workdir.join("metrics").join(k.to_string())) {
                            Ok(value) => {
                                accuracy.insert(metric_id.clone(), value);
                            }
                            Err(detail) => {
                                failed = true;
                                push_line(&mut log, &format!("metric {metric_id} failed: {detail}"));
                            }
                        }
                    }
                    if failed { ScenarioStatus::MetricFailed } else { ScenarioStatus::Ok }
                }
            }
        };

        let result = ScenarioResult {
            scenario: scenario.clone(),
            status,
            accuracy,
            timing: measured.timing,
            resources: measured.resources,
            log_excerpt: keep_tail(log, self.limits.max_output_bytes),
        };
        if status == ScenarioStatus::Ok {
            std::fs::remove_dir_all(workdir)?;
        }
        tracing::debug!(scenario = %scenario.key(), status = status.as_str(), "scenario finished");
        Ok(result)
    }

    #[allow(clippy::too_many_arguments)]
    fn run_metric(
        &self,
        metric_id: &ComponentId,
        components: &Materialized,
        report: &CompatReport,
        model_id: &ComponentId,
        output_dir: &Path,
        dataset_paths: &BTreeMap<String, PathBuf>,
        workdir: &Path,
    ) -> Result<f64, String> {
        let (metric, metric_dir) = components.metric(metric_id).map_err(|e| e.to_string())?;
        std::fs::create_dir_all(workdir).map_err(|e| e.to_string())?;
        let mut inputs = PluginInputs { inputs: BTreeMap::new(), output_dir: None, ground_truth: Default::default() };
        for s in report.inputs_of(metric_id) {
            if s.producer.as_ref() == Some(model_id) {
                if let Some(path) = find_output(output_dir, &s.producer_port) {
                    let path = std::path::absolute(path).map_err(|e| e.to_string())?;
                    inputs.inputs.insert(s.port.clone(), path);
                }
            } else if let Some(path) = dataset_paths.get(&s.producer_port) {
                inputs.inputs.insert(s.port.clone(), path.clone());
                inputs.ground_truth.insert(s.port.clone());
            }
        }
        write_invocation(workdir, &inputs, &serde_json::json!({})).map_err(|e| e.to_string())?;
        let entry = std::path::absolute(metric_dir.join(&metric.entrypoint)).map_err(|e| e.to_string())?;
        let measured = measure_execution(&command_for(&entry, workdir), &self.limits).map_err(|e| e.to_string())?;
        if !measured.status.success() {
            let mut detail = measured.status.to_string();
            if !measured.log_excerpt.is_empty() {
                push_line(&mut detail, &measured.log_excerpt);
            }
            return Err(detail);
        }
        read_metric_result(workdir)
    }

    /// Runs every scenario of `instrumented` in order and assembles a
    /// private run executed by `executed_by`. Scenario failures are
    /// recorded in the results; only setup and I/O failures abort.
    pub fn execute(
        &self,
        instrumented: &InstrumentedContext,
        source: &dyn ComponentSource,
        executed_by: &str,
    ) -> Result<BenchmarkRun> {
        let expected = expand_context(&instrumented.context)?;
        if expected != instrumented.scenarios {
            return Err(HarnessError::InvalidInstrumentation("scenario list differs from the context's expansion".into()));
        }
        if !instrumented.profile.is_valid() {
            return Err(HarnessError::InvalidInstrumentation("profile is invalid".into()));
        }
        let run_id = ulid::Ulid::new().to_string();
        let run_dir = self.limits.working_dir_root.join(&run_id);
        std::fs::create_dir_all(&run_dir)?;
        let started_at = Utc::now();

        let components_dir = run_dir.join("components");
        let components = Materialized::load(source, instrumented.context.components(), &components_dir)?;
        for s in &instrumented.scenarios {
            components.check(s)?;
        }
        let scenarios_dir = run_dir.join("scenarios");
        let mut results = Vec::with_capacity(instrumented.scenarios.len());
        for (i, s) in instrumented.scenarios.iter().enumerate() {
            results.push(self.run_scenario(s, &components, &scenarios_dir.join(format!("{i:04}")))?);
        }
        let finished_at = Utc::now().max(started_at);

        std::fs::remove_dir_all(&components_dir)?;
        let _ = std::fs::remove_dir(&scenarios_dir);
        let _ = std::fs::remove_dir(&run_dir);

        Ok(BenchmarkRun {
            run_id,
            context_id: instrumented.context.context_id.clone(),
            profile: instrumented.profile.clone(),
            results,
            executed_by: executed_by.to_string(),
            started_at,
            finished_at,
            visibility: Visibility::Private,
            minted_identifier: None,
        })
    }
}

fn keep_tail(mut log: String, max: usize) -> String {
    if log.len() <= max {
        return log;
    }
    let mut cut = log.len() - max;
    while !log.is_char_boundary(cut) {
        cut += 1;
    }
    log.drain(..cut);
    log
}
