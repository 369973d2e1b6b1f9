//! Analysis over recorded runs.
//!
//! Runs are flattened into a [`RunTable`]; everything else works on that
//! table together with a declared [`CausalGraph`].

mod graph;
mod impact;
mod pareto;
mod predict;
mod recommend;
mod slice;
pub(crate) mod table;
mod virtual_run;

use thiserror::Error;

pub use graph::{CausalGraph, GraphNode, NodeKind};
pub use impact::{estimate_impact, levels, Contrast, EffectEstimate, StratumDetail};
pub use pareto::{pareto_front, pareto_indices, points_from_table, Direction, Objective, ParetoPoint};
pub use predict::{
    predict, AdditiveFit, Assignment, BasisReport, FactorEffect, OutcomePrediction, Prediction, PredictionMode,
    UnseenLevel,
};
pub use recommend::{recommend, RecommendRequest, Recommendation, DEFAULT_OUTCOME};
pub use slice::{filter_rows, slice, Aggregate, AggregateFn, Filter, FilterOp, SliceSpec};
pub use table::{build_table, Cell, Column, ColumnKind, RunTable};
pub use virtual_run::{assemble_virtual_run, is_accessible, Coverage, VirtualRun};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("unknown graph node `{0}`")]
    UnknownNode(String),
    #[error("graph node `{0}` covers several columns; name one column")]
    AmbiguousNode(String),
    #[error("no stratum has rows for both levels of `{0}`")]
    NoOverlap(String),
    #[error("column `{0}` is not a factor of outcome `{1}` in this graph")]
    NotAFactor(String, String),
    #[error("missing objective value: {0}")]
    MissingObjective(String),
    #[error("table has no usable rows")]
    EmptyTable,
    #[error("invalid causal graph: {0}")]
    InvalidGraph(String),
    #[error("invalid context: {0}")]
    InvalidContext(String),
}
