use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::model::{BenchmarkRun, ComponentId, DatasetDescriptor, Scalar};

/// One table cell. `Null` marks a value that was never recorded, which is
/// different from zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Bool(bool),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn is_null(&self) -> bool {
        matches!(self, Cell::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Cell::Num(_) => 0,
            Cell::Text(_) => 1,
            Cell::Bool(_) => 2,
            Cell::Null => 3,
        }
    }

    /// Total order: numbers, then text, then booleans, then nulls.
    pub fn total_cmp(&self, other: &Cell) -> Ordering {
        match (self, other) {
            (Cell::Num(a), Cell::Num(b)) => a.total_cmp(b),
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            (Cell::Bool(a), Cell::Bool(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }

    /// Value equality used by filters and level matching. Numbers compare
    /// numerically, so `1` and `1.0` are the same level.
    pub fn same(&self, other: &Cell) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Null => f.write_str("null"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<&Scalar> for Cell {
    fn from(s: &Scalar) -> Self {
        match s {
            Scalar::Bool(b) => Cell::Bool(*b),
            Scalar::Int(i) => Cell::Num(*i as f64),
            Scalar::Float(x) => Cell::Num(*x),
            Scalar::Str(s) => Cell::Text(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Factor,
    Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// A flat table of recorded results, one row per scenario result.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RunTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl RunTable {
    pub fn new(columns: Vec<Column>) -> Self {
        RunTable { columns, rows: Vec::new() }
    }

    /// Builds a table from named columns of equal length; every column is a
    /// factor unless listed in `outcomes`.
    pub fn from_columns(data: Vec<(&str, Vec<Cell>)>, outcomes: &[&str]) -> Self {
        let n = data.first().map_or(0, |(_, v)| v.len());
        let columns = data
            .iter()
            .map(|(name, _)| Column {
                name: name.to_string(),
                kind: if outcomes.contains(name) { ColumnKind::Outcome } else { ColumnKind::Factor },
            })
            .collect();
        let rows = (0..n).map(|i| data.iter().map(|(_, v)| v[i].clone()).collect()).collect();
        RunTable { columns, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn require_column(&self, name: &str) -> Result<usize, AnalysisError> {
        self.column_index(name).ok_or_else(|| AnalysisError::UnknownColumn(name.to_string()))
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn cell(&self, row: usize, column: &str) -> Option<&Cell> {
        self.column_index(column).map(|c| &self.rows[row][c])
    }

    /// CSV with a header row; missing values are written as `null`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str())).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

fn factor(name: impl Into<String>) -> Column {
    Column { name: name.into(), kind: ColumnKind::Factor }
}

fn outcome(name: impl Into<String>) -> Column {
    Column { name: name.into(), kind: ColumnKind::Outcome }
}

/// Flattens runs into a [`RunTable`].
///
/// Column order is fixed: identifiers, `dataset` and its `dataset.<prop>`
/// properties, `model`, `hyper.<param>`, `profile.*` and `runtime.<name>`,
/// `status`, then outcomes (`accuracy.<metric>`, timings, resources).
/// Dynamic column groups are sorted by name. Values that were never recorded
/// are `null`.
pub fn build_table(runs: &[BenchmarkRun], datasets: &[DatasetDescriptor]) -> RunTable {
    let by_id: BTreeMap<&ComponentId, &DatasetDescriptor> = datasets.iter().map(|d| (&d.id, d)).collect();

    let mut dataset_props = BTreeSet::new();
    let mut hyper_keys = BTreeSet::new();
    let mut runtimes = BTreeSet::new();
    let mut metrics = BTreeSet::new();
    for run in runs {
        runtimes.extend(run.profile.runtime_versions.keys().cloned());
        for r in &run.results {
            if let Some(d) = by_id.get(&r.scenario.dataset) {
                dataset_props.extend(d.config.keys().cloned());
            }
            hyper_keys.extend(r.scenario.hyper.values.keys().cloned());
            metrics.extend(r.scenario.metrics.iter().map(|m| m.to_string()));
            metrics.extend(r.accuracy.keys().map(|m| m.to_string()));
        }
    }

    let mut columns = vec![factor("run_id"), factor("executed_by"), factor("scenario_key"), factor("dataset")];
    columns.extend(dataset_props.iter().map(|p| factor(format!("dataset.{p}"))));
    columns.push(factor("model"));
    columns.extend(hyper_keys.iter().map(|k| factor(format!("hyper.{k}"))));
    for c in [
        "profile.hash",
        "profile.cpu_model",
        "profile.physical_cores",
        "profile.total_memory_bytes",
        "profile.gpu_model",
        "profile.os_name_version",
    ] {
        columns.push(factor(c));
    }
    columns.extend(runtimes.iter().map(|r| factor(format!("runtime.{r}"))));
    columns.push(factor("status"));
    columns.extend(metrics.iter().map(|m| outcome(format!("accuracy.{m}"))));
    for c in ["wall_time_s", "cpu_time_s", "gpu_time_s", "peak_cpu_memory_bytes", "peak_gpu_memory_bytes"] {
        columns.push(outcome(c));
    }

    let mut table = RunTable::new(columns);
    for run in runs {
        let p = &run.profile;
        for r in &run.results {
            let s = &r.scenario;
            let mut row = vec![
                Cell::from(run.run_id.as_str()),
                Cell::from(run.executed_by.as_str()),
                Cell::from(s.key()),
                Cell::from(s.dataset.to_string()),
            ];
            let config = by_id.get(&s.dataset).map(|d| &d.config);
            for prop in &dataset_props {
                row.push(config.and_then(|c| c.get(prop)).map_or(Cell::Null, Cell::from));
            }
            row.push(Cell::from(s.model.to_string()));
            for k in &hyper_keys {
                row.push(s.hyper.values.get(k).map_or(Cell::Null, Cell::from));
            }
            row.push(Cell::from(p.profile_hash.as_str()));
            row.push(Cell::from(p.cpu_model.as_str()));
            row.push(Cell::Num(p.physical_cores as f64));
            row.push(Cell::Num(p.total_memory_bytes as f64));
            row.push(Cell::from(p.gpu_model.clone()));
            row.push(Cell::from(p.os_name_version.as_str()));
            for rt in &runtimes {
                row.push(Cell::from(p.runtime_versions.get(rt).cloned()));
            }
            row.push(Cell::from(r.status.as_str()));
            for m in &metrics {
                let v = r.accuracy.iter().find(|(id, _)| id.to_string() == *m).map(|(_, v)| *v);
                row.push(Cell::from(v));
            }
            row.push(Cell::Num(r.timing.wall_time_s));
            row.push(Cell::Num(r.timing.cpu_time_s));
            row.push(Cell::from(r.timing.gpu_time_s));
            row.push(Cell::Num(r.resources.peak_cpu_memory_bytes as f64));
            row.push(Cell::from(r.resources.peak_gpu_memory_bytes.map(|b| b as f64)));
            table.rows.push(row);
        }
    }
    table
}
