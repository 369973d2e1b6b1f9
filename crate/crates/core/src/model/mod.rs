//! The benchmark data model: components and their signatures, contexts and
//! the scenarios they expand to, system profiles, and recorded runs.

mod context;
mod descriptors;
mod hyper;
mod ids;
mod ports;
mod profile;
mod results;
mod validate;

pub use context::{expand_context, instrument, scenario_key, BenchmarkContext, BenchmarkScenario, InstrumentedContext};
pub use descriptors::{
    check_relative_path, DatasetDescriptor, DatasetFile, Descriptor, MetricDescriptor, MetricDirection,
    ModelDescriptor,
};
pub use hyper::{HyperparameterSetting, ParamSpec, ParamType, Scalar};
pub use ids::{is_valid_name, ComponentId, ComponentKind, TaskKind};
pub use ports::{DataRole, PortSpec, SignatureSpec};
pub use profile::SystemProfile;
pub use results::{BenchmarkRun, Resources, ScenarioResult, ScenarioStatus, Timing, Visibility};
pub use validate::{validate_run, ValidationReport, Violation};
