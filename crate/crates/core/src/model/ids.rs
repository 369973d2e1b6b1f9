use std::fmt;
use std::str::FromStr;

use schemars::JsonSchema;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ModelError;

/// Dataset, model, or metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Dataset,
    Model,
    Metric,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Dataset => "dataset",
            ComponentKind::Model => "model",
            ComponentKind::Metric => "metric",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComponentKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dataset" => Ok(ComponentKind::Dataset),
            "model" => Ok(ComponentKind::Model),
            "metric" => Ok(ComponentKind::Metric),
            other => Err(ModelError::SchemaViolation(format!("unknown component kind `{other}`"))),
        }
    }
}

/// The family of causal learning task a model or metric serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    CausalDiscovery,
    CausalEffectEstimation,
    CausalInterpretability,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::CausalDiscovery => "causal-discovery",
            TaskKind::CausalEffectEstimation => "causal-effect-estimation",
            TaskKind::CausalInterpretability => "causal-interpretability",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "causal-discovery" => Ok(TaskKind::CausalDiscovery),
            "causal-effect-estimation" => Ok(TaskKind::CausalEffectEstimation),
            "causal-interpretability" => Ok(TaskKind::CausalInterpretability),
            other => Err(ModelError::SchemaViolation(format!("unknown task kind `{other}`"))),
        }
    }
}

/// A versioned component name, written `owner/slug@version`.
///
/// Ordering is by name, then numerically by version, which is also the
/// canonical order used when expanding contexts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentId {
    name: String,
    version: u32,
}

fn valid_segment(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| matches!(b, b'a'..=b'z' | b'0'..=b'9' | b'_' | b'-'))
}

/// Checks a namespaced name against `[a-z0-9_-]+/[a-z0-9_-]+`.
pub fn is_valid_name(name: &str) -> bool {
    match name.split_once('/') {
        Some((owner, slug)) => valid_segment(owner) && valid_segment(slug),
        None => false,
    }
}

impl ComponentId {
    pub fn new(name: impl Into<String>, version: u32) -> Result<Self, ModelError> {
        let name = name.into();
        if version == 0 || !is_valid_name(&name) {
            return Err(ModelError::InvalidId(format!("{name}@{version}")));
        }
        Ok(ComponentId { name, version })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    /// The namespace part of the name.
    pub fn owner(&self) -> &str {
        self.name.split_once('/').map(|(o, _)| o).unwrap_or(&self.name)
    }

    pub fn slug(&self) -> &str {
        self.name.split_once('/').map(|(_, s)| s).unwrap_or("")
    }

    pub fn with_version(&self, version: u32) -> Result<Self, ModelError> {
        ComponentId::new(self.name.clone(), version)
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.version)
    }
}

impl FromStr for ComponentId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, version) = s
            .rsplit_once('@')
            .ok_or_else(|| ModelError::InvalidId(s.to_string()))?;
        let version: u32 = version.parse().map_err(|_| ModelError::InvalidId(s.to_string()))?;
        ComponentId::new(name, version).map_err(|_| ModelError::InvalidId(s.to_string()))
    }
}

impl Serialize for ComponentId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ComponentId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl JsonSchema for ComponentId {
    fn schema_name() -> String {
        "ComponentId".to_string()
    }

    fn json_schema(_: &mut schemars::gen::SchemaGenerator) -> schemars::schema::Schema {
        schemars::schema::SchemaObject {
            instance_type: Some(schemars::schema::InstanceType::String.into()),
            string: Some(Box::new(schemars::schema::StringValidation {
                pattern: Some("^[a-z0-9_-]+/[a-z0-9_-]+@[1-9][0-9]*$".to_string()),
                ..Default::default()
            })),
            ..Default::default()
        }
        .into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays() {
        let id: ComponentId = "alice/toy-scm@3".parse().unwrap();
        assert_eq!(id.name(), "alice/toy-scm");
        assert_eq!(id.version(), 3);
        assert_eq!(id.owner(), "alice");
        assert_eq!(id.slug(), "toy-scm");
        assert_eq!(id.to_string(), "alice/toy-scm@3");
    }

    #[test]
    fn rejects_bad_ids() {
        for bad in [
            "alice/toy@0",
            "Alice/toy@1",
            "alice@1",
            "alice/toy/x@1",
            "alice/@1",
            "alice/toy",
            "alice/toy@v1",
            "alice/to y@1",
        ] {
            assert!(bad.parse::<ComponentId>().is_err(), "{bad} should be rejected");
        }
    }

    #[test]
    fn versions_order_numerically() {
        let a: ComponentId = "x/y@2".parse().unwrap();
        let b: ComponentId = "x/y@10".parse().unwrap();
        assert!(a < b);
    }

    #[test]
    fn serializes_as_string() {
        let id = ComponentId::new("a/b", 1).unwrap();
        assert_eq!(serde_json::to_string(&id).unwrap(), "\"a/b@1\"");
        let back: ComponentId = serde_json::from_str("\"a/b@1\"").unwrap();
        assert_eq!(back, id);
        assert!(serde_json::from_str::<ComponentId>("\"a/b@0\"").is_err());
    }
}
