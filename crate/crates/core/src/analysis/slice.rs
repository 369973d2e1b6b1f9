use std::cmp::Ordering;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::table::{Cell, Column, ColumnKind, RunTable};
use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum FilterOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    IsNull,
    NotNull,
}

/// `column <op> value`. Ordered comparisons only hold between two numbers
/// or two strings; a null cell only matches `is-null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Filter {
    pub column: String,
    pub op: FilterOp,
    #[serde(default = "null_cell")]
    pub value: Cell,
}

fn null_cell() -> Cell {
    Cell::Null
}

impl Filter {
    pub fn new(column: impl Into<String>, op: FilterOp, value: impl Into<Cell>) -> Self {
        Filter { column: column.into(), op, value: value.into() }
    }

    pub fn eq(column: impl Into<String>, value: impl Into<Cell>) -> Self {
        Filter::new(column, FilterOp::Eq, value)
    }

    pub fn matches(&self, cell: &Cell) -> bool {
        match self.op {
            FilterOp::IsNull => return cell.is_null(),
            FilterOp::NotNull => return !cell.is_null(),
            _ => {}
        }
        if cell.is_null() {
            return false;
        }
        let ord = match (cell, &self.value) {
            (Cell::Num(a), Cell::Num(b)) => a.partial_cmp(b),
            (Cell::Text(a), Cell::Text(b)) => Some(a.cmp(b)),
            (Cell::Bool(a), Cell::Bool(b)) => Some(a.cmp(b)),
            _ => None,
        };
        match (self.op, ord) {
            (FilterOp::Eq, Some(o)) => o == Ordering::Equal,
            (FilterOp::Ne, Some(o)) => o != Ordering::Equal,
            (FilterOp::Ne, None) => true,
            (FilterOp::Lt, Some(o)) if !matches!(cell, Cell::Bool(_)) => o == Ordering::Less,
            (FilterOp::Le, Some(o)) if !matches!(cell, Cell::Bool(_)) => o != Ordering::Greater,
            (FilterOp::Gt, Some(o)) if !matches!(cell, Cell::Bool(_)) => o == Ordering::Greater,
            (FilterOp::Ge, Some(o)) if !matches!(cell, Cell::Bool(_)) => o != Ordering::Less,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum AggregateFn {
    Mean,
    Median,
    Min,
    Max,
    Count,
}

impl AggregateFn {
    fn label(self) -> &'static str {
        match self {
            AggregateFn::Mean => "mean",
            AggregateFn::Median => "median",
            AggregateFn::Min => "min",
            AggregateFn::Max => "max",
            AggregateFn::Count => "count",
        }
    }

    /// Applies the aggregate to the non-null numeric values of a group.
    pub fn apply(self, values: &[f64]) -> Cell {
        if self == AggregateFn::Count {
            return Cell::Num(values.len() as f64);
        }
        if values.is_empty() {
            return Cell::Null;
        }
        let x = match self {
            AggregateFn::Mean => values.iter().sum::<f64>() / values.len() as f64,
            AggregateFn::Median => {
                let mut v = values.to_vec();
                v.sort_by(f64::total_cmp);
                let mid = v.len() / 2;
                if v.len() % 2 == 1 {
                    v[mid]
                } else {
                    (v[mid - 1] + v[mid]) / 2.0
                }
            }
            AggregateFn::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            AggregateFn::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            AggregateFn::Count => unreachable!(),
        };
        Cell::Num(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Aggregate {
    pub column: String,
    #[serde(rename = "fn")]
    pub func: AggregateFn,
}

impl Aggregate {
    pub fn new(column: impl Into<String>, func: AggregateFn) -> Self {
        Aggregate { column: column.into(), func }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SliceSpec {
    #[serde(default)]
    pub filters: Vec<Filter>,
    #[serde(default)]
    pub group_by: Vec<String>,
    #[serde(default)]
    pub aggregates: Vec<Aggregate>,
}

/// Keeps the rows that pass every filter.
pub fn filter_rows(table: &RunTable, filters: &[Filter]) -> Result<RunTable, AnalysisError> {
    let idx: Vec<usize> = filters.iter().map(|f| table.require_column(&f.column)).collect::<Result<_, _>>()?;
    let rows = table
        .rows
        .iter()
        .filter(|row| filters.iter().zip(&idx).all(|(f, &i)| f.matches(&row[i])))
        .cloned()
        .collect();
    Ok(RunTable { columns: table.columns.clone(), rows })
}

/// Filter, then group, then aggregate.
///
/// With no aggregates the filtered rows come back unchanged. Otherwise the
/// result has the group-by columns, one `<fn>(<column>)` column per
/// aggregate, and one `n(<column>)` column per aggregated column counting
/// the non-null cells that fed it. Groups are ordered by their key values.
pub fn slice(table: &RunTable, spec: &SliceSpec) -> Result<RunTable, AnalysisError> {
    let filtered = filter_rows(table, &spec.filters)?;
    if spec.aggregates.is_empty() && spec.group_by.is_empty() {
        return Ok(filtered);
    }
    let group_idx: Vec<usize> =
        spec.group_by.iter().map(|c| table.require_column(c)).collect::<Result<_, _>>()?;
    let agg_idx: Vec<usize> =
        spec.aggregates.iter().map(|a| table.require_column(&a.column)).collect::<Result<_, _>>()?;

    let mut counted: Vec<(String, usize)> = Vec::new();
    for (a, &i) in spec.aggregates.iter().zip(&agg_idx) {
        if !counted.iter().any(|(c, _)| *c == a.column) {
            counted.push((a.column.clone(), i));
        }
    }

    let mut groups: Vec<(Vec<Cell>, Vec<usize>)> = Vec::new();
    for (r, row) in filtered.rows.iter().enumerate() {
        let key: Vec<Cell> = group_idx.iter().map(|&i| row[i].clone()).collect();
        match groups.iter_mut().find(|(k, _)| k.iter().zip(&key).all(|(a, b)| a.same(b))) {
            Some((_, members)) => members.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups.sort_by(|(a, _), (b, _)| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    });

    let mut columns: Vec<Column> = spec.group_by.iter().map(|c| Column { name: c.clone(), kind: ColumnKind::Factor }).collect();
    for a in &spec.aggregates {
        columns.push(Column { name: format!("{}({})", a.func.label(), a.column), kind: ColumnKind::Outcome });
    }
    for (c, _) in &counted {
        columns.push(Column { name: format!("n({c})"), kind: ColumnKind::Outcome });
    }

    let numeric = |members: &[usize], col: usize| -> Vec<f64> {
        members.iter().filter_map(|&r| filtered.rows[r][col].as_f64()).collect()
    };
    let mut out = RunTable::new(columns);
    for (key, members) in groups {
        let mut row = key;
        for (a, &i) in spec.aggregates.iter().zip(&agg_idx) {
            row.push(a.func.apply(&numeric(&members, i)));
        }
        for (_, i) in &counted {
            let n = members.iter().filter(|&&r| !filtered.rows[r][*i].is_null()).count();
            row.push(Cell::Num(n as f64));
        }
        out.rows.push(row);
    }
    Ok(out)
}
