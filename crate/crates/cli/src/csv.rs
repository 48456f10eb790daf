//! Plain numeric CSV output and the schema check used on every artifact.

use std::fmt::Write as _;

use crate::error::{CliError, CliResult};

/// Numeric table with a fixed header. Values print with `{}` so they
/// round-trip exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

/// Checks header names and that every row has that many numeric cells.
/// Returns the number of data rows.
pub fn validate_csv(text: &str, columns: &[&str]) -> CliResult<usize> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::Config("empty CSV".into()))?;
    let found: Vec<&str> = header.split(',').map(str::trim).collect();
    if found != columns {
        return Err(CliError::Config(format!(
            "CSV header {found:?} does not match expected {columns:?}"
        )));
    }
    let mut rows = 0;
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(CliError::Config(format!(
                "CSV row {} has {} cells, expected {}",
                n + 1,
                cells.len(),
                columns.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|c| c.trim().parse::<f64>().is_err()) {
            return Err(CliError::Config(format!(
                "CSV row {} has non-numeric cell `{bad}`",
                n + 1
            )));
        }
        rows += 1;
    }
    Ok(rows)
}
