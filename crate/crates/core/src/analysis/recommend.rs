//! Ranking of configurations worth executing next.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::graph::CausalGraph;
use super::predict::{AdditiveFit, Assignment};
use super::table::{Cell, RunTable};
use super::AnalysisError;
use crate::canonical;

pub const DEFAULT_OUTCOME: &str = "wall_time_s";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RecommendRequest {
    /// Column name -> candidate levels. The candidates are the Cartesian
    /// product of these lists.
    pub grid: BTreeMap<String, Vec<Cell>>,
    pub k: usize,
    /// Outcome whose prediction interval breaks ties; `wall_time_s` when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Recommendation {
    pub configuration: Assignment,
    /// Canonical JSON of `configuration`.
    pub key: String,
    pub covering_rows: usize,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Recommendation {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn cartesian(grid: &BTreeMap<String, Vec<Cell>>) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for (column, levels) in grid {
        let mut next = Vec::with_capacity(out.len() * levels.len());
        for partial in &out {
            for level in levels {
                let mut a = partial.clone();
                a.insert(column.clone(), level.clone());
                next.push(a);
            }
        }
        out = next;
    }
    out
}

/// Ranks grid configurations by how little the table says about them:
/// fewest covering rows first, then widest prediction interval, then
/// canonical key. A configuration is dropped when the grid fixes every
/// varying factor column of the outcome and the table already has rows for
/// it. At most `k` configurations are returned. Grid columns must be factor
/// columns of the outcome's fit.
pub fn recommend(
    table: &RunTable,
    graph: &CausalGraph,
    request: &RecommendRequest,
) -> Result<Vec<Recommendation>, AnalysisError> {
    graph.validate()?;
    let outcome = request.outcome.as_deref().unwrap_or(DEFAULT_OUTCOME);
    let fit = AdditiveFit::fit(table, graph, outcome)?;
    if let Some(column) = request.grid.keys().find(|c| !fit.factor_columns().any(|f| f == c.as_str())) {
        return Err(AnalysisError::NotAFactor(column.clone(), outcome.to_string()));
    }
    let fully_fixed = fit.varying_columns().all(|c| request.grid.contains_key(c));

    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for configuration in cartesian(&request.grid) {
        let key = canonical::to_string(&configuration).expect("cells serialize");
        if !seen.insert(key.clone()) {
            continue;
        }
        let p = fit.predict(&configuration);
        let covering_rows = p.basis.covering_rows;
        if fully_fixed && covering_rows > 0 {
            continue;
        }
        out.push(Recommendation { configuration, key, covering_rows, point: p.point, lower: p.lower, upper: p.upper });
    }
    out.sort_by(|a, b| {
        a.covering_rows
            .cmp(&b.covering_rows)
            .then_with(|| b.width().partial_cmp(&a.width()).unwrap_or(Ordering::Equal))
            .then_with(|| a.key.cmp(&b.key))
    });
    out.truncate(request.k);
    Ok(out)
}
