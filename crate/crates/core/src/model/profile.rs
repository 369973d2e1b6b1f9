use std::collections::BTreeMap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::canonical;

/// Hardware and software description of the machine a run executed on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub struct SystemProfile {
    pub cpu_model: String,
    pub physical_cores: u32,
    pub total_memory_bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gpu_model: Option<String>,
    pub os_name_version: String,
    #[serde(default)]
    pub runtime_versions: BTreeMap<String, String>,
    /// SHA-256 of the canonical serialization of every other field.
    pub profile_hash: String,
}

#[derive(Serialize)]
struct HashedFields<'a> {
    cpu_model: &'a str,
    physical_cores: u32,
    total_memory_bytes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gpu_model: Option<&'a str>,
    os_name_version: &'a str,
    runtime_versions: &'a BTreeMap<String, String>,
}

impl SystemProfile {
    pub fn new(
        cpu_model: impl Into<String>,
        physical_cores: u32,
        total_memory_bytes: u64,
        gpu_model: Option<String>,
        os_name_version: impl Into<String>,
        runtime_versions: BTreeMap<String, String>,
    ) -> Self {
        let mut p = SystemProfile {
            cpu_model: cpu_model.into(),
            physical_cores,
            total_memory_bytes,
            gpu_model,
            os_name_version: os_name_version.into(),
            runtime_versions,
            profile_hash: String::new(),
        };
        p.profile_hash = p.compute_hash();
        p
    }

    pub fn compute_hash(&self) -> String {
        canonical::hash_of(&HashedFields {
            cpu_model: &self.cpu_model,
            physical_cores: self.physical_cores,
            total_memory_bytes: self.total_memory_bytes,
            gpu_model: self.gpu_model.as_deref(),
            os_name_version: &self.os_name_version,
            runtime_versions: &self.runtime_versions,
        })
        .expect("profile fields always serialize")
    }

    pub fn hash_is_consistent(&self) -> bool {
        self.profile_hash == self.compute_hash()
    }

    pub fn is_valid(&self) -> bool {
        self.physical_cores >= 1 && self.hash_is_consistent()
    }
}
