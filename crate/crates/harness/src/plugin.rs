//! The file protocol between the harness and plugins.
//!
//! A plugin runs with its working directory set to a fresh scenario
//! directory holding:
//!
//! * `inputs.json`: `{"inputs": {<port>: <absolute path>}, ...}`. For a
//!   model it also has `output_dir`; for a metric, `ground_truth` names the
//!   input ports that were served from the dataset.
//! * `params.json`: the hyperparameter setting in canonical JSON. A `seed`
//!   key, if present, is passed through unchanged.
//!
//! A model writes one file per output port as `outputs/<port>.<ext>`. A
//! metric writes `result.json` containing `{"value": <float>}`.
//!
//! Entrypoints ending in `.py` run under the interpreter named by
//! `CB_PYTHON` (default `python3`); anything else is executed directly.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use causalbench_core::canonical;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measure::CommandSpec;

pub const INPUTS_FILE: &str = "inputs.json";
pub const PARAMS_FILE: &str = "params.json";
pub const OUTPUTS_DIR: &str = "outputs";
pub const RESULT_FILE: &str = "result.json";
pub const PYTHON_ENV: &str = "CB_PYTHON";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluginInputs {
    pub inputs: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub ground_truth: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
}

pub fn python_interpreter() -> String {
    std::env::var(PYTHON_ENV).ok().filter(|s| !s.is_empty()).unwrap_or_else(|| "python3".into())
}

/// How to launch `entrypoint` from `workdir`.
pub fn command_for(entrypoint: &Path, workdir: &Path) -> CommandSpec {
    if entrypoint.extension().is_some_and(|e| e == "py") {
        CommandSpec::new(python_interpreter(), workdir).arg(entrypoint)
    } else {
        CommandSpec::new(entrypoint, workdir)
    }
}

/// Writes `inputs.json` and `params.json` into `workdir`.
pub fn write_invocation<P: Serialize>(workdir: &Path, inputs: &PluginInputs, params: &P) -> Result<()> {
    std::fs::write(workdir.join(INPUTS_FILE), canonical::to_vec(inputs).map_err(std::io::Error::other)?)?;
    std::fs::write(workdir.join(PARAMS_FILE), canonical::to_vec(params).map_err(std::io::Error::other)?)?;
    Ok(())
}

/// The file a model wrote for `port`: the first entry of `outputs/`, in
/// name order, whose stem is the port name.
pub fn find_output(output_dir: &Path, port: &str) -> Option<PathBuf> {
    let mut matches: Vec<PathBuf> = std::fs::read_dir(output_dir)
        .ok()?
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.file_stem().and_then(|s| s.to_str()) == Some(port))
        .collect();
    matches.sort();
    matches.into_iter().next()
}

/// Reads a metric's `result.json`; the value must be a finite number.
pub fn read_metric_result(workdir: &Path) -> std::result::Result<f64, String> {
    let text = std::fs::read_to_string(workdir.join(RESULT_FILE)).map_err(|e| format!("{RESULT_FILE}: {e}"))?;
    let result: MetricResult = serde_json::from_str(&text).map_err(|e| format!("{RESULT_FILE}: {e}"))?;
    if !result.value.is_finite() {
        return Err(format!("{RESULT_FILE}: value {} is not finite", result.value));
    }
    Ok(result.value)
}
