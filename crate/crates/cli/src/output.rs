//! Result tables as CSV with a `#` provenance header, or as JSON.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(k) => json!(k),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn to_csv(cfg: &RunConfig, table: &Table) -> String {
    let mut s = format!("# hmix {} {}\n", cfg.command.as_str(), env!("CARGO_PKG_VERSION"));
    for (k, v) in cfg.pairs() {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn to_json(cfg: &RunConfig, table: &Table) -> String {
    let config: serde_json::Map<String, Value> = cfg.pairs().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let rows: Vec<Value> = table.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
    let doc = json!({
        "program": "hmix",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "columns": table.columns,
        "rows": rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// CSV to `--out` (JSON mirror next to it with `--json`), or to stdout.
pub fn emit(cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => {
            write_file(path, &to_csv(cfg, table))?;
            if cfg.json {
                write_file(&path.with_extension("json"), &to_json(cfg, table))?;
            }
        }
        None => {
            let text = if cfg.json { to_json(cfg, table) } else { to_csv(cfg, table) };
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(())
}
