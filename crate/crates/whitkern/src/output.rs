//! CSV and JSON writers sharing one table model.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Env var naming the default output directory.
pub const OUT_DIR_ENV: &str = "WHITKERN_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Parse(format!("--format: expected csv or json, got {s:?}"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }
}

pub fn render(config: &BTreeMap<String, String>, table: &Table, format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Csv => render_csv(config, table),
        Format::Json => render_json(config, table),
    }
}

fn render_csv(config: &BTreeMap<String, String>, table: &Table) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    for (k, v) in config {
        writeln!(buf, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(buf);
    let csv_err = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
}

fn render_json(config: &BTreeMap<String, String>, table: &Table) -> CliResult<Vec<u8>> {
    let cfg: Map<String, Value> = config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    let records: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let m: Map<String, Value> =
                table.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
            Value::Object(m)
        })
        .collect();
    let mut root = Map::new();
    root.insert("config".into(), Value::Object(cfg));
    root.insert("records".into(), Value::Array(records));
    let mut out = serde_json::to_vec_pretty(&Value::Object(root)).map_err(|e| CliError::Io(e.into()))?;
    out.push(b'\n');
    Ok(out)
}

/// `--out` if given, else `$WHITKERN_OUT_DIR/<command>.<ext>`, else stdout.
pub fn destination(out: Option<&str>, command: &str, format: Format) -> Option<PathBuf> {
    if let Some(p) = out {
        return Some(PathBuf::from(p));
    }
    let dir = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty())?;
    Some(Path::new(&dir).join(format!("{command}.{}", format.extension())))
}

pub fn emit(bytes: &[u8], dest: Option<&Path>) -> CliResult<()> {
    match dest {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, bytes)?;
        }
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}
