//! Host probing for [`SystemProfile`].

use std::collections::BTreeMap;
use std::process::Command;

use causalbench_core::model::SystemProfile;
use sysinfo::{CpuRefreshKind, MemoryRefreshKind, RefreshKind, System};

use crate::error::{HarnessError, Result};
use crate::plugin::python_interpreter;

/// Environment variable naming the GPU model. GPU detection is not
/// automatic; without it the profile has no GPU.
pub const GPU_MODEL_ENV: &str = "CB_GPU_MODEL";

/// Describes the current host. Two calls on an unchanged host return the
/// same profile hash.
pub fn resolve_environment() -> Result<SystemProfile> {
    let sys = System::new_with_specifics(
        RefreshKind::nothing()
            .with_cpu(CpuRefreshKind::nothing())
            .with_memory(MemoryRefreshKind::nothing().with_ram()),
    );
    let cpu_model = sys
        .cpus()
        .first()
        .map(|c| c.brand().trim().to_string())
        .ok_or_else(|| HarnessError::ProbeFailure("no CPU information".into()))?;
    let cpu_model = if cpu_model.is_empty() { "unknown".to_string() } else { cpu_model };
    let physical_cores = sys
        .physical_core_count()
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .max(1) as u32;
    let total_memory_bytes = sys.total_memory();
    if total_memory_bytes == 0 {
        return Err(HarnessError::ProbeFailure(format!("total memory unavailable (cpu: {cpu_model})")));
    }
    let os_name_version = System::long_os_version()
        .or_else(System::name)
        .ok_or_else(|| HarnessError::ProbeFailure("operating system unknown".into()))?;
    let gpu_model = std::env::var(GPU_MODEL_ENV).ok().filter(|s| !s.trim().is_empty());
    Ok(SystemProfile::new(cpu_model, physical_cores, total_memory_bytes, gpu_model, os_name_version, runtime_versions()))
}

fn runtime_versions() -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    out.insert("causalbench".to_string(), env!("CARGO_PKG_VERSION").to_string());
    if let Some(v) = python_version() {
        out.insert("python".to_string(), v);
    }
    out
}

fn python_version() -> Option<String> {
    let out = Command::new(python_interpreter()).arg("--version").output().ok()?;
    let text = if out.stdout.is_empty() { out.stderr } else { out.stdout };
    let text = String::from_utf8_lossy(&text);
    text.trim().strip_prefix("Python ").map(str::to_string)
}
