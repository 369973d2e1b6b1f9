//! Non-dominated subsets of benchmark results.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::table::RunTable;
use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Objective {
    pub column: String,
    pub direction: Direction,
}

impl Objective {
    pub fn minimize(column: impl Into<String>) -> Self {
        Objective { column: column.into(), direction: Direction::Minimize }
    }

    pub fn maximize(column: impl Into<String>) -> Self {
        Objective { column: column.into(), direction: Direction::Maximize }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ParetoPoint {
    pub id: String,
    /// One value per objective, in objective order.
    pub values: Vec<Option<f64>>,
}

/// `a` dominates `b`: no worse everywhere and strictly better somewhere.
/// Both vectors are already oriented for minimization.
fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Indices of the non-dominated rows of `values`, in input order.
///
/// Points are visited in lexicographic order of their minimization-oriented
/// vectors. A point can only be dominated by one that sorts before it, so
/// each point is checked against the front found so far and the front never
/// has to be revised. Exact duplicates never dominate each other, so every
/// copy of a front point is kept.
pub fn pareto_indices(values: &[Vec<f64>], directions: &[Direction]) -> Vec<usize> {
    let oriented: Vec<Vec<f64>> = values
        .iter()
        .map(|v| {
            v.iter()
                .zip(directions)
                .map(|(x, d)| match d {
                    Direction::Minimize => *x,
                    Direction::Maximize => -*x,
                })
                .collect()
        })
        .collect();

    let mut order: Vec<usize> = (0..oriented.len()).collect();
    order.sort_by(|&i, &j| {
        oriented[i]
            .iter()
            .zip(&oriented[j])
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates(&oriented[f], &oriented[i])) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

/// Ids of the points on the Pareto front, in input order.
pub fn pareto_front(points: &[ParetoPoint], objectives: &[Objective]) -> Result<Vec<String>, AnalysisError> {
    let mut values = Vec::with_capacity(points.len());
    for p in points {
        if p.values.len() != objectives.len() {
            return Err(AnalysisError::MissingObjective(format!(
                "point `{}` has {} values for {} objectives",
                p.id,
                p.values.len(),
                objectives.len()
            )));
        }
        let mut row = Vec::with_capacity(objectives.len());
        for (v, o) in p.values.iter().zip(objectives) {
            match v {
                Some(x) if x.is_finite() => row.push(*x),
                _ => {
                    return Err(AnalysisError::MissingObjective(format!(
                        "point `{}` has no value for `{}`",
                        p.id, o.column
                    )))
                }
            }
        }
        values.push(row);
    }
    let directions: Vec<Direction> = objectives.iter().map(|o| o.direction).collect();
    Ok(pareto_indices(&values, &directions).into_iter().map(|i| points[i].id.clone()).collect())
}

/// Turns table rows into Pareto points, identified by `id_column` (or the
/// row index when absent).
pub fn points_from_table(
    table: &RunTable,
    objectives: &[Objective],
    id_column: Option<&str>,
) -> Result<Vec<ParetoPoint>, AnalysisError> {
    let obj_idx: Vec<usize> = objectives.iter().map(|o| table.require_column(&o.column)).collect::<Result<_, _>>()?;
    let id_idx = id_column.map(|c| table.require_column(c)).transpose()?;
    Ok(table
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| ParetoPoint {
            id: id_idx.map_or_else(|| r.to_string(), |i| row[i].to_string()),
            values: obj_idx.iter().map(|&i| row[i].as_f64()).collect(),
        })
        .collect())
}
