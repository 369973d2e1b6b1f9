//! Adjacency matrices in the plugin CSV format and the reference
//! structural Hamming distance.
//!
//! The CSV has a header row of variable names followed by one row of 0/1
//! entries per variable; entry `(i, j)` is 1 when there is an edge `i -> j`.

use std::path::Path;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    pub names: Vec<String>,
    pub matrix: Vec<Vec<u8>>,
}

impl Adjacency {
    pub fn parse(text: &str) -> Result<Adjacency> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
        let bad = |e: csv::Error| HarnessError::InvalidAdjacency(e.to_string());
        let names: Vec<String> = reader.headers().map_err(bad)?.iter().map(str::to_string).collect();
        let mut matrix = Vec::new();
        for record in reader.records() {
            let record = record.map_err(bad)?;
            let row = record
                .iter()
                .map(|cell| match cell {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(HarnessError::InvalidAdjacency(format!("entry `{other}` is not 0 or 1"))),
                })
                .collect::<Result<Vec<u8>>>()?;
            matrix.push(row);
        }
        if matrix.len() != names.len() || matrix.iter().any(|r| r.len() != names.len()) {
            return Err(HarnessError::InvalidAdjacency(format!(
                "{} names but a {}-row matrix",
                names.len(),
                matrix.len()
            )));
        }
        Ok(Adjacency { names, matrix })
    }

    pub fn read(path: &Path) -> Result<Adjacency> {
        Adjacency::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.names.join(",");
        out.push('\n');
        for row in &self.matrix {
            let cells: Vec<&str> = row.iter().map(|&x| if x == 1 { "1" } else { "0" }).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Number of off-diagonal entries on which two directed adjacency matrices
/// differ. A reversed edge therefore counts twice.
pub fn reference_metric_shd(predicted: &[Vec<u8>], truth: &[Vec<u8>]) -> Result<f64> {
    let n = truth.len();
    if predicted.len() != n {
        return Err(HarnessError::ShapeMismatch(format!("{} vs {} rows", predicted.len(), n)));
    }
    for (which, m) in [("predicted", predicted), ("true", truth)] {
        for (i, row) in m.iter().enumerate() {
            if row.len() != n {
                return Err(HarnessError::ShapeMismatch(format!("{which} row {i} has {} columns, expected {n}", row.len())));
            }
            if row[i] != 0 {
                return Err(HarnessError::InvalidAdjacency(format!("{which} matrix has a self-loop at {i}")));
            }
            if row.iter().any(|&x| x > 1) {
                return Err(HarnessError::InvalidAdjacency(format!("{which} row {i} is not binary")));
            }
        }
    }
    let mut count = 0u32;
    for i in 0..n {
        for j in 0..n {
            if i != j && predicted[i][j] != truth[i][j] {
                count += 1;
            }
        }
    }
    Ok(f64::from(count))
}
