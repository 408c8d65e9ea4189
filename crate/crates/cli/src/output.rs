//! Tables written as CSV or JSON, each carrying the run configuration.
//!
//! CSV floats use 17 significant digits so that they round-trip. The
//! configuration goes in a trailing `config` column, filled on the first
//! data row only.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    B(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::F(v) => format!("{v}"),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) => json!(v),
            Cell::U(v) => json!(v),
            Cell::S(s) => json!(s),
            Cell::B(b) => json!(b),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// The JSON document: `{"config": ..., <key>: [rows]}`.
fn json_doc(cfg: &RunConfig, key: &str, rows: Value) -> Value {
    let mut m = Map::new();
    m.insert("config".into(), serde_json::to_value(cfg).unwrap_or(Value::Null));
    m.insert(key.into(), rows);
    Value::Object(m)
}

/// `key` names the row array in JSON; CSV has no use for it.
pub fn table_to_string(cfg: &RunConfig, key: &str, table: &Table) -> Result<String, CliError> {
    match cfg.format {
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| Value::Object(table.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect()))
                .collect();
            Ok(serde_json::to_string_pretty(&json_doc(cfg, key, Value::Array(rows)))? + "\n")
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = table.columns.clone();
            header.push("config".into());
            w.write_record(&header)?;
            let echo = serde_json::to_string(cfg)?;
            for (i, r) in table.rows.iter().enumerate() {
                let mut rec: Vec<String> = r.iter().map(Cell::csv).collect();
                rec.push(if i == 0 { echo.clone() } else { String::new() });
                w.write_record(&rec)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Writes to the configured destination, or to standard output.
pub fn emit(cfg: &RunConfig, stem: &str, text: &str) -> Result<(), CliError> {
    match cfg.destination(stem) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
