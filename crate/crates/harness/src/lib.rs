//! Local execution of benchmark contexts.
//!
//! [`resolve_environment`] describes the host, [`Harness::execute`] runs an
//! instrumented context's scenarios one after another as plugin processes,
//! and the resulting [`BenchmarkRun`](causalbench_core::model::BenchmarkRun)
//! is ready to upload. See [`plugin`] for the file protocol plugins follow.

mod error;
mod execute;
mod measure;
pub mod plugin;
mod profile;
mod shd;

pub use error::{HarnessError, Result};
pub use execute::{ComponentSource, Harness, LocalSource, Materialized, RegistrySource};
pub use measure::{measure_execution, CommandSpec, ExecutionLimits, ExitStatus, Measurement};
pub use profile::{resolve_environment, GPU_MODEL_ENV};
pub use shd::{reference_metric_shd, Adjacency};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/harness.md")]
pub mod book {}
