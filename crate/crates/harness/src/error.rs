use causalbench_core::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("probe failed: {0}")]
    ProbeFailure(String),
    #[error("cannot spawn `{program}`: {detail}")]
    SpawnFailure { program: String, detail: String },
    #[error("scenario {scenario_key} is incompatible: {detail}")]
    IncompatibleScenario { scenario_key: String, detail: String },
    #[error("component {id}: {detail}")]
    Component { id: String, detail: String },
    #[error("invalid limits: {0}")]
    InvalidLimits(String),
    #[error("adjacency shapes differ: {0}")]
    ShapeMismatch(String),
    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(String),
    #[error("instrumented context does not match its context: {0}")]
    InvalidInstrumentation(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
