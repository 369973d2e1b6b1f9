//! Request bodies for `cb analyze`, built from flags on top of an optional
//! JSON request file.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{usage, Result};
use crate::{AnalyzeCommand, SourceArgs};

/// A cell value from the command line: JSON when it parses, text otherwise.
pub fn parse_cell(text: &str) -> Value {
    match serde_json::from_str::<Value>(text) {
        Ok(v @ (Value::Null | Value::Bool(_) | Value::Number(_) | Value::String(_))) => v,
        _ => Value::String(text.to_string()),
    }
}

/// `col=v`, `col!=v`, `col<v`, `col<=v`, `col>v`, `col>=v`, `col:null`,
/// `col:not-null`.
pub fn parse_filter(text: &str) -> Result<Value> {
    for (suffix, op) in [(":not-null", "not-null"), (":null", "is-null")] {
        if let Some(column) = text.strip_suffix(suffix) {
            return Ok(json!({"column": column, "op": op}));
        }
    }
    let bad = || usage(format!("invalid filter `{text}`; expected e.g. `model=demo/threshold@1` or `wall_time_s<2`"));
    let at = text.find(['!', '<', '>', '=']).ok_or_else(bad)?;
    let (column, rest) = text.split_at(at);
    let (op, value) = match rest.as_bytes() {
        [b'!', b'=', ..] => ("ne", &rest[2..]),
        [b'<', b'=', ..] => ("le", &rest[2..]),
        [b'>', b'=', ..] => ("ge", &rest[2..]),
        [b'<', ..] => ("lt", &rest[1..]),
        [b'>', ..] => ("gt", &rest[1..]),
        [b'=', ..] => ("eq", &rest[1..]),
        _ => return Err(bad()),
    };
    if column.is_empty() {
        return Err(bad());
    }
    Ok(json!({"column": column, "op": op, "value": parse_cell(value)}))
}

fn split_pair<'a>(text: &'a str, sep: char, what: &str) -> Result<(&'a str, &'a str)> {
    match text.rsplit_once(sep) {
        Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((a, b)),
        _ => Err(usage(format!("invalid {what} `{text}`"))),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn base(source: &SourceArgs) -> Result<Map<String, Value>> {
    let mut body = match &source.request {
        Some(p) => match read_json(p)? {
            Value::Object(m) => m,
            _ => return Err(usage(format!("{}: request must be a JSON object", p.display()))),
        },
        None => Map::new(),
    };
    if let Some(id) = &source.context_id {
        body.insert("context_id".into(), id.clone().into());
    }
    if let Some(p) = &source.context {
        body.insert("context".into(), read_json(p)?);
    }
    if !source.runs.is_empty() {
        body.insert("run_ids".into(), json!(source.runs));
    }
    if let Some(p) = &source.graph {
        body.insert("graph".into(), read_json(p)?);
    }
    Ok(body)
}

fn set(body: &mut Map<String, Value>, key: &str, value: Option<Value>) {
    if let Some(v) = value {
        body.insert(key.into(), v);
    }
}

fn list(values: Vec<Value>) -> Option<Value> {
    (!values.is_empty()).then_some(Value::Array(values))
}

fn filters(texts: &[String]) -> Result<Vec<Value>> {
    texts.iter().map(|f| parse_filter(f)).collect()
}

/// The endpoint name and request body for an analysis command.
pub fn request(command: &AnalyzeCommand) -> Result<(&'static str, Value)> {
    let (name, body) = match command {
        AnalyzeCommand::Slice { source, filters: f, group_by, aggregates } => {
            let mut body = base(source)?;
            set(&mut body, "filters", list(filters(f)?));
            set(&mut body, "group_by", list(group_by.iter().map(|g| json!(g)).collect()));
            let aggs = aggregates
                .iter()
                .map(|a| split_pair(a, ':', "aggregate").map(|(c, f)| json!({"column": c, "fn": f})))
                .collect::<Result<Vec<_>>>()?;
            set(&mut body, "aggregates", list(aggs));
            ("slice", body)
        }
        AnalyzeCommand::Impact { source, factor, level_a, level_b, outcome } => {
            let mut body = base(source)?;
            if factor.is_some() || level_a.is_some() || level_b.is_some() {
                let mut treatment = match body.remove("treatment") {
                    Some(Value::Object(m)) => m,
                    _ => Map::new(),
                };
                set(&mut treatment, "factor", factor.clone().map(Value::from));
                set(&mut treatment, "level_a", level_a.as_deref().map(parse_cell));
                set(&mut treatment, "level_b", level_b.as_deref().map(parse_cell));
                body.insert("treatment".into(), Value::Object(treatment));
            }
            set(&mut body, "outcome", outcome.clone().map(Value::from));
            ("impact", body)
        }
        AnalyzeCommand::Pareto { source, objectives, filters: f, id_column } => {
            let mut body = base(source)?;
            let objs = objectives
                .iter()
                .map(|o| {
                    let (column, dir) = split_pair(o, ':', "objective")?;
                    let direction = match dir {
                        "min" | "minimize" => "minimize",
                        "max" | "maximize" => "maximize",
                        _ => return Err(usage(format!("invalid objective `{o}`; expected `column:min` or `column:max`"))),
                    };
                    Ok(json!({"column": column, "direction": direction}))
                })
                .collect::<Result<Vec<_>>>()?;
            set(&mut body, "objectives", list(objs));
            set(&mut body, "filters", list(filters(f)?));
            set(&mut body, "id_column", id_column.clone().map(Value::from));
            ("pareto", body)
        }
        AnalyzeCommand::Predict { source, set: assignments, outcomes } => {
            let mut body = base(source)?;
            if !assignments.is_empty() {
                let mut target = match body.remove("target") {
                    Some(Value::Object(m)) => m,
                    _ => Map::new(),
                };
                for a in assignments {
                    let (column, value) = split_pair(a, '=', "assignment")?;
                    target.insert(column.into(), parse_cell(value));
                }
                body.insert("target".into(), Value::Object(target));
            }
            set(&mut body, "outcomes", list(outcomes.iter().map(|o| json!(o)).collect()));
            ("predict", body)
        }
        AnalyzeCommand::Recommend { source, grid, k, outcome } => {
            let mut body = base(source)?;
            if !grid.is_empty() {
                let mut g = match body.remove("grid") {
                    Some(Value::Object(m)) => m,
                    _ => Map::new(),
                };
                for entry in grid {
                    let (column, levels) = entry
                        .split_once('=')
                        .filter(|(c, l)| !c.is_empty() && !l.is_empty())
                        .ok_or_else(|| usage(format!("invalid grid `{entry}`; expected `column=v1,v2`")))?;
                    g.insert(column.into(), Value::Array(levels.split(',').map(parse_cell).collect()));
                }
                body.insert("grid".into(), Value::Object(g));
            }
            set(&mut body, "k", k.map(Value::from));
            set(&mut body, "outcome", outcome.clone().map(Value::from));
            ("recommend", body)
        }
    };
    Ok((name, Value::Object(body)))
}
