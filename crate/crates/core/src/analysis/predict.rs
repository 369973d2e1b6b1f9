//! Additive factor-effects prediction for configurations that may not have
//! been executed.
//!
//! For each outcome the model uses only the factor columns of the outcome's
//! parents in the graph. Each column is effect-coded (its level effects sum
//! to zero), so a prediction is the intercept plus one effect per assigned
//! column. A level that never appears in the table has no estimated effect;
//! it contributes zero and is reported as non-shareable.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::graph::CausalGraph;
use super::table::{Cell, ColumnKind, RunTable};
use super::AnalysisError;

/// Column name -> level. Keys that are not factor columns of an outcome's
/// parents are ignored for that outcome.
pub type Assignment = BTreeMap<String, Cell>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionMode {
    /// The table has rows matching every assigned column; the point is
    /// their mean.
    ExactCell,
    /// No matching rows; the point comes from the additive fit.
    Additive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct FactorEffect {
    pub column: String,
    pub level: Cell,
    pub effect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct UnseenLevel {
    pub column: String,
    pub level: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct BasisReport {
    pub mode: PredictionMode,
    /// Parent nodes of the outcome in the graph.
    pub parent_nodes: Vec<String>,
    /// Rows with a numeric outcome value.
    pub rows_used: usize,
    /// Of those, rows matching every assigned column.
    pub covering_rows: usize,
    pub grand_mean: f64,
    /// Effects estimated from the table and carried over to the target.
    pub transferred: Vec<FactorEffect>,
    /// Target levels absent from the table; their effect is taken as 0.
    pub non_shareable: Vec<UnseenLevel>,
    /// Factor columns the target left unassigned; their effect is taken as 0.
    pub unassigned: Vec<String>,
    pub residual_sd: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct OutcomePrediction {
    pub outcome: String,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub basis: BasisReport,
}

impl OutcomePrediction {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Prediction {
    pub target: Assignment,
    pub outcomes: Vec<OutcomePrediction>,
}

const INTERACTIONS_NOTE: &str =
    "additive effects only: interactions between factors are not modelled, so joint effects of unobserved combinations may differ";

struct ColumnCoding {
    name: String,
    index: usize,
    levels: Vec<Cell>,
    /// First design-matrix column for this factor (k-1 columns).
    offset: usize,
}

impl ColumnCoding {
    fn level_of(&self, cell: &Cell) -> Option<usize> {
        self.levels.iter().position(|l| l.same(cell))
    }
}

/// An additive fit of one outcome, reusable across many targets.
pub struct AdditiveFit<'t> {
    table: &'t RunTable,
    outcome: String,
    parent_nodes: Vec<String>,
    rows: Vec<usize>,
    y: Vec<f64>,
    codings: Vec<ColumnCoding>,
    beta: DVector<f64>,
    residual_sd: f64,
}

fn distinct_levels<'a>(cells: impl Iterator<Item = &'a Cell>) -> Vec<Cell> {
    let mut levels: Vec<Cell> = Vec::new();
    for c in cells {
        if !levels.iter().any(|l| l.same(c)) {
            levels.push(c.clone());
        }
    }
    levels.sort_by(Cell::total_cmp);
    levels
}

fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    Some((values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt())
}

impl<'t> AdditiveFit<'t> {
    pub fn fit(table: &'t RunTable, graph: &CausalGraph, outcome: &str) -> Result<AdditiveFit<'t>, AnalysisError> {
        if table.is_empty() {
            return Err(AnalysisError::EmptyTable);
        }
        let y_idx = table.require_column(outcome)?;
        let y_node = graph.resolve(outcome)?;
        let parent_nodes: Vec<String> = graph.parents(&y_node.name).into_iter().map(str::to_string).collect();

        let mut factor_cols: Vec<usize> = Vec::new();
        for p in &parent_nodes {
            let node = graph.require_node(p)?;
            for c in graph.columns_of(node, table) {
                let i = table.require_column(&c)?;
                if table.columns[i].kind == ColumnKind::Factor && !factor_cols.contains(&i) {
                    factor_cols.push(i);
                }
            }
        }
        factor_cols.sort_unstable();

        let rows: Vec<usize> = (0..table.len()).filter(|&r| table.rows[r][y_idx].as_f64().is_some()).collect();
        if rows.is_empty() {
            return Err(AnalysisError::EmptyTable);
        }
        let y: Vec<f64> = rows.iter().map(|&r| table.rows[r][y_idx].as_f64().unwrap()).collect();

        let mut codings = Vec::new();
        let mut width = 1;
        for &i in &factor_cols {
            let levels = distinct_levels(rows.iter().map(|&r| &table.rows[r][i]));
            let k = levels.len();
            codings.push(ColumnCoding { name: table.columns[i].name.clone(), index: i, levels, offset: width });
            width += k.saturating_sub(1);
        }

        let mut x = DMatrix::<f64>::zeros(rows.len(), width);
        for (n, &r) in rows.iter().enumerate() {
            x[(n, 0)] = 1.0;
            for c in &codings {
                let k = c.levels.len();
                if k < 2 {
                    continue;
                }
                let l = c.level_of(&table.rows[r][c.index]).expect("level taken from these rows");
                if l + 1 == k {
                    for j in 0..k - 1 {
                        x[(n, c.offset + j)] = -1.0;
                    }
                } else {
                    x[(n, c.offset + l)] = 1.0;
                }
            }
        }
        let yv = DVector::from_column_slice(&y);
        let svd = x.clone().svd(true, true);
        let max_sv = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let eps = (max_sv * 1e-10).max(f64::MIN_POSITIVE);
        let rank = svd.rank(eps);
        let beta = svd.solve(&yv, eps).expect("U and V were computed");
        let rss: f64 = (&yv - &x * &beta).iter().map(|e| e * e).sum();
        let dof = rows.len().saturating_sub(rank).max(1);
        let residual_sd = (rss / dof as f64).sqrt();

        Ok(AdditiveFit {
            table,
            outcome: outcome.to_string(),
            parent_nodes,
            rows,
            y,
            codings,
            beta,
            residual_sd,
        })
    }

    /// Factor columns the fit uses, in table order.
    pub fn factor_columns(&self) -> impl Iterator<Item = &str> {
        self.codings.iter().map(|c| c.name.as_str())
    }

    /// Factor columns with more than one level among the fitted rows.
    pub fn varying_columns(&self) -> impl Iterator<Item = &str> {
        self.codings.iter().filter(|c| c.levels.len() > 1).map(|c| c.name.as_str())
    }

    fn effect(&self, c: &ColumnCoding, level: usize) -> f64 {
        let k = c.levels.len();
        if k < 2 {
            return 0.0;
        }
        if level + 1 == k {
            -(0..k - 1).map(|j| self.beta[c.offset + j]).sum::<f64>()
        } else {
            self.beta[c.offset + level]
        }
    }

    /// Rows (among those with an outcome value) matching every assigned
    /// factor column of this fit.
    pub fn covering_rows(&self, target: &Assignment) -> Vec<usize> {
        let assigned: Vec<(&ColumnCoding, &Cell)> =
            self.codings.iter().filter_map(|c| target.get(&c.name).map(|v| (c, v))).collect();
        (0..self.rows.len())
            .filter(|&n| assigned.iter().all(|(c, v)| self.table.rows[self.rows[n]][c.index].same(v)))
            .collect()
    }

    pub fn predict(&self, target: &Assignment) -> OutcomePrediction {
        let mut transferred = Vec::new();
        let mut non_shareable = Vec::new();
        let mut unassigned = Vec::new();
        let grand_mean = self.beta[0];
        let mut additive = grand_mean;
        for c in &self.codings {
            match target.get(&c.name) {
                None => unassigned.push(c.name.clone()),
                Some(v) => match c.level_of(v) {
                    Some(l) => {
                        let effect = self.effect(c, l);
                        additive += effect;
                        transferred.push(FactorEffect { column: c.name.clone(), level: v.clone(), effect });
                    }
                    None => non_shareable.push(UnseenLevel { column: c.name.clone(), level: v.clone() }),
                },
            }
        }

        let covering = self.covering_rows(target);
        let cell: Vec<f64> = covering.iter().map(|&n| self.y[n]).collect();
        let (mode, point, sd) = if cell.is_empty() || !non_shareable.is_empty() {
            (PredictionMode::Additive, additive, self.residual_sd)
        } else {
            let mean = cell.iter().sum::<f64>() / cell.len() as f64;
            (PredictionMode::ExactCell, mean, sample_sd(&cell).unwrap_or(self.residual_sd))
        };

        OutcomePrediction {
            outcome: self.outcome.clone(),
            point,
            lower: point - 2.0 * sd,
            upper: point + 2.0 * sd,
            basis: BasisReport {
                mode,
                parent_nodes: self.parent_nodes.clone(),
                rows_used: self.rows.len(),
                covering_rows: cell.len(),
                grand_mean,
                transferred,
                non_shareable,
                unassigned,
                residual_sd: self.residual_sd,
                note: INTERACTIONS_NOTE.to_string(),
            },
        }
    }
}

/// Predicts each requested outcome at `target`. With no outcomes listed,
/// every outcome column that has at least one numeric value is predicted.
pub fn predict(
    table: &RunTable,
    graph: &CausalGraph,
    target: &Assignment,
    outcomes: &[String],
) -> Result<Prediction, AnalysisError> {
    if table.is_empty() {
        return Err(AnalysisError::EmptyTable);
    }
    graph.validate()?;
    let chosen: Vec<String> = if outcomes.is_empty() {
        table
            .columns
            .iter()
            .enumerate()
            .filter(|(i, c)| c.kind == ColumnKind::Outcome && table.rows.iter().any(|r| r[*i].as_f64().is_some()))
            .map(|(_, c)| c.name.clone())
            .collect()
    } else {
        outcomes.to_vec()
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for o in chosen {
        if seen.insert(o.clone()) {
            out.push(AdditiveFit::fit(table, graph, &o)?.predict(target));
        }
    }
    Ok(Prediction { target: target.clone(), outcomes: out })
}
