//! Backdoor-adjusted impact of one factor on one outcome.
//!
//! The adjustment set is read off the declared graph: the treatment's
//! parents that are also ancestors of the outcome. Rows are stratified
//! exactly on the levels of the adjustment columns (numeric columns with
//! more than four distinct values are cut at their quartiles first), the
//! contrast is taken inside each stratum that has both arms, and the
//! stratum contrasts are averaged with weights proportional to stratum size.

use std::collections::BTreeMap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::graph::CausalGraph;
use super::table::{Cell, RunTable};
use super::AnalysisError;

/// `factor = level_a` versus `factor = level_b`; the estimate is
/// `E[outcome | a] - E[outcome | b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Contrast {
    pub factor: String,
    pub level_a: Cell,
    pub level_b: Cell,
}

impl Contrast {
    pub fn new(factor: impl Into<String>, level_a: impl Into<Cell>, level_b: impl Into<Cell>) -> Self {
        Contrast { factor: factor.into(), level_a: level_a.into(), level_b: level_b.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct StratumDetail {
    /// Adjustment column -> level label.
    pub stratum: BTreeMap<String, String>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct EffectEstimate {
    pub treatment: Contrast,
    /// Column the treatment levels were read from.
    pub treatment_column: String,
    pub outcome: String,
    /// Graph nodes adjusted for.
    pub adjusted_for: Vec<String>,
    /// Table columns those nodes cover.
    pub adjustment_columns: Vec<String>,
    pub estimate: f64,
    pub standard_error: f64,
    pub unadjusted: f64,
    pub stratum_details: Vec<StratumDetail>,
    /// Strata dropped because one arm had no rows.
    pub dropped_strata: Vec<BTreeMap<String, String>>,
}

/// Maps a column's values to stratum labels.
pub(crate) struct Binner {
    cuts: Option<[f64; 3]>,
}

impl Binner {
    /// Quartile bins when every value is numeric and there are more than
    /// four distinct values; exact levels otherwise.
    pub(crate) fn fit<'a>(values: impl Iterator<Item = &'a Cell>) -> Binner {
        let mut nums = Vec::new();
        for v in values {
            match v {
                Cell::Num(x) => nums.push(*x),
                _ => return Binner { cuts: None },
            }
        }
        nums.sort_by(f64::total_cmp);
        let mut distinct = nums.clone();
        distinct.dedup();
        if distinct.len() <= 4 {
            return Binner { cuts: None };
        }
        let q = |p: f64| {
            let pos = p * (nums.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            nums[lo] + (nums[hi] - nums[lo]) * (pos - lo as f64)
        };
        Binner { cuts: Some([q(0.25), q(0.5), q(0.75)]) }
    }

    pub(crate) fn label(&self, cell: &Cell) -> String {
        match (self.cuts, cell) {
            (Some([q1, q2, q3]), Cell::Num(x)) => {
                let k = if *x <= q1 {
                    1
                } else if *x <= q2 {
                    2
                } else if *x <= q3 {
                    3
                } else {
                    4
                };
                format!("Q{k}")
            }
            _ => cell.to_string(),
        }
    }
}

#[derive(Default)]
struct Arm {
    values: Vec<f64>,
}

impl Arm {
    fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    fn sample_variance(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64
    }
}

/// Picks the single column a treatment refers to.
fn treatment_column(table: &RunTable, graph: &CausalGraph, factor: &str) -> Result<String, AnalysisError> {
    if table.column_index(factor).is_some() {
        return Ok(factor.to_string());
    }
    let node = graph.require_node(factor)?;
    match graph.columns_of(node, table).as_slice() {
        [only] => Ok(only.clone()),
        [] => Err(AnalysisError::UnknownColumn(factor.to_string())),
        _ => Err(AnalysisError::AmbiguousNode(factor.to_string())),
    }
}

pub fn estimate_impact(
    table: &RunTable,
    graph: &CausalGraph,
    treatment: &Contrast,
    outcome: &str,
) -> Result<EffectEstimate, AnalysisError> {
    graph.validate()?;
    let t_col = treatment_column(table, graph, &treatment.factor)?;
    let t_idx = table.require_column(&t_col)?;
    let y_idx = table.require_column(outcome)?;
    let t_node = graph.resolve(&treatment.factor)?;
    let y_node = graph.resolve(outcome)?;

    let ancestors = graph.ancestors(&y_node.name);
    let adjusted_for: Vec<String> = graph
        .parents(&t_node.name)
        .into_iter()
        .filter(|p| ancestors.contains(p))
        .map(str::to_string)
        .collect();
    let mut adjustment_columns: Vec<String> = Vec::new();
    for name in &adjusted_for {
        for c in graph.columns_of(graph.require_node(name)?, table) {
            if c != t_col && !adjustment_columns.contains(&c) {
                adjustment_columns.push(c);
            }
        }
    }
    let adj_idx: Vec<usize> = adjustment_columns.iter().map(|c| table.require_column(c)).collect::<Result<_, _>>()?;

    // (row, is_a, y) for rows in either arm with a numeric outcome.
    let used: Vec<(usize, bool, f64)> = table
        .rows
        .iter()
        .enumerate()
        .filter_map(|(r, row)| {
            let y = row[y_idx].as_f64()?;
            let t = &row[t_idx];
            if t.same(&treatment.level_a) {
                Some((r, true, y))
            } else if t.same(&treatment.level_b) {
                Some((r, false, y))
            } else {
                None
            }
        })
        .collect();

    let binners: Vec<Binner> = adj_idx
        .iter()
        .map(|&c| Binner::fit(used.iter().map(|(r, _, _)| &table.rows[*r][c])))
        .collect();

    let mut all = (Arm::default(), Arm::default());
    let mut strata: BTreeMap<Vec<String>, (Arm, Arm)> = BTreeMap::new();
    for &(r, is_a, y) in &used {
        let key: Vec<String> = adj_idx.iter().zip(&binners).map(|(&c, b)| b.label(&table.rows[r][c])).collect();
        let entry = strata.entry(key).or_default();
        if is_a {
            entry.0.values.push(y);
            all.0.values.push(y);
        } else {
            entry.1.values.push(y);
            all.1.values.push(y);
        }
    }
    if all.0.values.is_empty() || all.1.values.is_empty() {
        return Err(AnalysisError::NoOverlap(format!(
            "`{t_col}` has no rows at one of the contrasted levels"
        )));
    }
    let unadjusted = all.0.mean() - all.1.mean();

    let label_map = |key: &[String]| -> BTreeMap<String, String> {
        adjustment_columns.iter().cloned().zip(key.iter().cloned()).collect()
    };
    let mut details = Vec::new();
    let mut dropped = Vec::new();
    let mut contributing = Vec::new();
    for (key, (a, b)) in &strata {
        if a.values.is_empty() || b.values.is_empty() {
            dropped.push(label_map(key));
            continue;
        }
        details.push(StratumDetail {
            stratum: label_map(key),
            mean_a: a.mean(),
            mean_b: b.mean(),
            n_a: a.values.len(),
            n_b: b.values.len(),
        });
        contributing.push((a, b));
    }
    if contributing.is_empty() {
        return Err(AnalysisError::NoOverlap("every stratum is missing an arm".into()));
    }

    let total: usize = details.iter().map(|d| d.n_a + d.n_b).sum();
    let mut estimate = 0.0;
    let mut variance = 0.0;
    for (d, (a, b)) in details.iter().zip(&contributing) {
        let w = (d.n_a + d.n_b) as f64 / total as f64;
        estimate += w * (d.mean_a - d.mean_b);
        variance += w * w * (a.sample_variance() / d.n_a as f64 + b.sample_variance() / d.n_b as f64);
    }

    Ok(EffectEstimate {
        treatment: treatment.clone(),
        treatment_column: t_col,
        outcome: outcome.to_string(),
        adjusted_for,
        adjustment_columns,
        estimate,
        standard_error: variance.sqrt(),
        unadjusted,
        stratum_details: details,
        dropped_strata: dropped,
    })
}

/// Distinct levels of a column, in table order.
pub fn levels(table: &RunTable, column: &str) -> Result<Vec<Cell>, AnalysisError> {
    let i = table.require_column(column)?;
    let mut seen: Vec<Cell> = Vec::new();
    for row in &table.rows {
        if !seen.iter().any(|c| c.same(&row[i])) {
            seen.push(row[i].clone());
        }
    }
    Ok(seen)
}
