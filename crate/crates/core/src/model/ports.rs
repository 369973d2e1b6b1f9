use std::collections::BTreeSet;
use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::ids::{ComponentKind, TaskKind};
use crate::error::ModelError;

/// What kind of artifact flows through a port. Compatibility is decided by
/// role equality alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum DataRole {
    TabularObservations,
    CausalGraph,
    TreatmentEffectEstimates,
    CounterfactualOutcomes,
    ExplanationArtifact,
    Scalar,
}

impl DataRole {
    pub fn as_str(self) -> &'static str {
        match self {
            DataRole::TabularObservations => "tabular-observations",
            DataRole::CausalGraph => "causal-graph",
            DataRole::TreatmentEffectEstimates => "treatment-effect-estimates",
            DataRole::CounterfactualOutcomes => "counterfactual-outcomes",
            DataRole::ExplanationArtifact => "explanation-artifact",
            DataRole::Scalar => "scalar",
        }
    }
}

impl fmt::Display for DataRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub struct PortSpec {
    pub port_name: String,
    pub data_role: DataRole,
    pub required: bool,
}

impl PortSpec {
    pub fn required(name: impl Into<String>, role: DataRole) -> Self {
        PortSpec { port_name: name.into(), data_role: role, required: true }
    }

    pub fn optional(name: impl Into<String>, role: DataRole) -> Self {
        PortSpec { port_name: name.into(), data_role: role, required: false }
    }
}

/// Rejects empty or duplicated port names within one list.
pub fn check_unique_ports(ports: &[PortSpec], what: &str) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for p in ports {
        if p.port_name.is_empty() {
            return Err(ModelError::SchemaViolation(format!("{what}: empty port name")));
        }
        if !seen.insert(p.port_name.as_str()) {
            return Err(ModelError::SchemaViolation(format!(
                "{what}: duplicate port `{}`",
                p.port_name
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SignatureSpec {
    pub task: TaskKind,
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
}

impl SignatureSpec {
    pub fn validate_for(&self, kind: ComponentKind) -> Result<(), ModelError> {
        check_unique_ports(&self.inputs, "inputs")?;
        check_unique_ports(&self.outputs, "outputs")?;
        match kind {
            ComponentKind::Model if self.outputs.is_empty() => Err(ModelError::SchemaViolation(
                "a model signature needs at least one output".into(),
            )),
            ComponentKind::Metric => {
                if self.inputs.is_empty() {
                    return Err(ModelError::SchemaViolation(
                        "a metric signature needs at least one input".into(),
                    ));
                }
                match self.outputs.as_slice() {
                    [only] if only.data_role == DataRole::Scalar => Ok(()),
                    _ => Err(ModelError::SchemaViolation(
                        "a metric signature has exactly one scalar output".into(),
                    )),
                }
            }
            _ => Ok(()),
        }
    }
}
