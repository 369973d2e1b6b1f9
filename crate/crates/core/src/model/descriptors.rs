use std::collections::BTreeMap;
use std::path::{Component, Path};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::hyper::{ParamSpec, Scalar};
use super::ids::{ComponentId, ComponentKind};
use super::ports::{check_unique_ports, PortSpec, SignatureSpec};
use crate::canonical::is_sha256_hex;
use crate::error::ModelError;

/// One file shipped inside a dataset payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct DatasetFile {
    /// Relative path inside the payload; doubles as the logical name.
    pub name: String,
    pub content_hash: String,
    pub byte_size: u64,
}

impl DatasetFile {
    /// The file name without directories or extension. A provided port is
    /// served by the file whose stem equals the port name.
    pub fn stem(&self) -> &str {
        Path::new(&self.name).file_stem().and_then(|s| s.to_str()).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct DatasetDescriptor {
    pub id: ComponentId,
    pub files: Vec<DatasetFile>,
    #[serde(default)]
    pub config: BTreeMap<String, Scalar>,
    pub provided_ports: Vec<PortSpec>,
}

impl DatasetDescriptor {
    pub fn file_for_port(&self, port_name: &str) -> Option<&DatasetFile> {
        self.files.iter().find(|f| f.stem() == port_name)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.files.is_empty() {
            return Err(ModelError::SchemaViolation("dataset has no files".into()));
        }
        for f in &self.files {
            check_relative_path(&f.name)?;
            if !is_sha256_hex(&f.content_hash) {
                return Err(ModelError::SchemaViolation(format!(
                    "file `{}` has a malformed content hash",
                    f.name
                )));
            }
        }
        if let Some(n) = self.config.get("n_rows") {
            match n {
                Scalar::Int(n) if *n >= 1 => {}
                _ => return Err(ModelError::SchemaViolation("n_rows must be an integer >= 1".into())),
            }
        }
        if let Some(kind) = self.config.get("data_kind") {
            if !matches!(kind, Scalar::Str(s) if ["iid", "time-series", "graph"].contains(&s.as_str())) {
                return Err(ModelError::SchemaViolation(
                    "data_kind must be one of iid, time-series, graph".into(),
                ));
            }
        }
        for v in self.config.values() {
            if !v.is_finite() {
                return Err(ModelError::SchemaViolation("dataset config holds a non-finite number".into()));
            }
        }
        check_unique_ports(&self.provided_ports, "provided_ports")?;
        for p in &self.provided_ports {
            if self.file_for_port(&p.port_name).is_none() {
                return Err(ModelError::SchemaViolation(format!(
                    "provided port `{}` has no file with that stem",
                    p.port_name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ModelDescriptor {
    pub id: ComponentId,
    pub signature: SignatureSpec,
    pub entrypoint: String,
    #[serde(default)]
    pub hyperparameter_schema: BTreeMap<String, ParamSpec>,
}

impl ModelDescriptor {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_relative_path(&self.entrypoint)?;
        self.signature.validate_for(ComponentKind::Model)?;
        for (name, spec) in &self.hyperparameter_schema {
            if !spec.admits(&spec.default) {
                return Err(ModelError::SchemaViolation(format!(
                    "default of `{name}` violates its own range"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum MetricDirection {
    HigherBetter,
    LowerBetter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct MetricDescriptor {
    pub id: ComponentId,
    pub signature: SignatureSpec,
    pub direction: MetricDirection,
    pub entrypoint: String,
}

impl MetricDescriptor {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_relative_path(&self.entrypoint)?;
        self.signature.validate_for(ComponentKind::Metric)
    }
}

/// Any of the three descriptor kinds, tagged by `kind` on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Descriptor {
    Dataset(DatasetDescriptor),
    Model(ModelDescriptor),
    Metric(MetricDescriptor),
}

impl Descriptor {
    pub fn kind(&self) -> ComponentKind {
        match self {
            Descriptor::Dataset(_) => ComponentKind::Dataset,
            Descriptor::Model(_) => ComponentKind::Model,
            Descriptor::Metric(_) => ComponentKind::Metric,
        }
    }

    pub fn id(&self) -> &ComponentId {
        match self {
            Descriptor::Dataset(d) => &d.id,
            Descriptor::Model(m) => &m.id,
            Descriptor::Metric(m) => &m.id,
        }
    }

    pub fn set_id(&mut self, id: ComponentId) {
        match self {
            Descriptor::Dataset(d) => d.id = id,
            Descriptor::Model(m) => m.id = id,
            Descriptor::Metric(m) => m.id = id,
        }
    }

    pub fn entrypoint(&self) -> Option<&str> {
        match self {
            Descriptor::Dataset(_) => None,
            Descriptor::Model(m) => Some(&m.entrypoint),
            Descriptor::Metric(m) => Some(&m.entrypoint),
        }
    }

    /// Task served, if the component has a signature.
    pub fn task(&self) -> Option<super::TaskKind> {
        match self {
            Descriptor::Dataset(_) => None,
            Descriptor::Model(m) => Some(m.signature.task),
            Descriptor::Metric(m) => Some(m.signature.task),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Descriptor::Dataset(d) => d.validate(),
            Descriptor::Model(m) => m.validate(),
            Descriptor::Metric(m) => m.validate(),
        }
    }

    pub fn as_dataset(&self) -> Option<&DatasetDescriptor> {
        match self {
            Descriptor::Dataset(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_model(&self) -> Option<&ModelDescriptor> {
        match self {
            Descriptor::Model(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_metric(&self) -> Option<&MetricDescriptor> {
        match self {
            Descriptor::Metric(m) => Some(m),
            _ => None,
        }
    }
}

/// Payload paths are relative, non-empty, and never climb out of the payload.
pub fn check_relative_path(path: &str) -> Result<(), ModelError> {
    let p = Path::new(path);
    let ok = !path.is_empty()
        && p.components().all(|c| matches!(c, Component::Normal(_)));
    if ok {
        Ok(())
    } else {
        Err(ModelError::SchemaViolation(format!("`{path}` is not a relative payload path")))
    }
}
