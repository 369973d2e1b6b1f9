use std::collections::BTreeMap;
use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::ModelError;

/// A JSON scalar: boolean, integer, float, or string.
///
/// Integers and floats stay distinct through a round trip because floats are
/// always written with a fractional part or exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl Scalar {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Int(i) => Some(*i as f64),
            Scalar::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Scalar::Float(f) => f.is_finite(),
            _ => true,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(x) => write!(f, "{x:?}"),
            Scalar::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Bool(v)
    }
}

impl From<&str> for Scalar {
    fn from(v: &str) -> Self {
        Scalar::Str(v.to_string())
    }
}

/// One hyperparameter assignment `h`. Keys are kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(transparent)]
pub struct HyperparameterSetting {
    pub values: BTreeMap<String, Scalar>,
}

impl HyperparameterSetting {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Scalar>) -> Self {
        self.values.insert(key.into(), value.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Canonical JSON of the setting; also the sort key used by expansion.
    pub fn canonical(&self) -> String {
        canonical::to_string(self).expect("scalar maps always serialize")
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (k, v) in &self.values {
            if k.is_empty() {
                return Err(ModelError::SchemaViolation("empty hyperparameter name".into()));
            }
            if !v.is_finite() {
                return Err(ModelError::SchemaViolation(format!("hyperparameter `{k}` is not finite")));
            }
        }
        Ok(())
    }
}

impl<K: Into<String>, V: Into<Scalar>> FromIterator<(K, V)> for HyperparameterSetting {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        HyperparameterSetting {
            values: iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum ParamType {
    Int,
    Float,
    String,
    Bool,
}

/// Declared type, default, and admissible values of one model parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ParamSpec {
    #[serde(rename = "type")]
    pub param_type: ParamType,
    pub default: Scalar,
    /// Inclusive numeric range `[min, max]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<Scalar>>,
}

impl ParamSpec {
    pub fn admits(&self, value: &Scalar) -> bool {
        let type_ok = matches!(
            (self.param_type, value),
            (ParamType::Int, Scalar::Int(_))
                | (ParamType::Float, Scalar::Float(_) | Scalar::Int(_))
                | (ParamType::String, Scalar::Str(_))
                | (ParamType::Bool, Scalar::Bool(_))
        );
        if !type_ok || !value.is_finite() {
            return false;
        }
        if let (Some([lo, hi]), Some(x)) = (self.range, value.as_f64()) {
            if x < lo || x > hi {
                return false;
            }
        }
        if let Some(allowed) = &self.allowed {
            if !allowed.contains(value) {
                return false;
            }
        }
        true
    }
}
