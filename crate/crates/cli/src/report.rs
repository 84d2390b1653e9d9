//! Tabular results and their CSV / JSON serializations.

use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // 17 significant digits round-trip every f64.
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => json!(x),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub tables: Vec<Table>,
    pub summary: Value,
}

/// Provenance written in front of every output.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub command: String,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub timestamp_unix: u64,
}

impl Metadata {
    pub fn new(command: &str, cfg: &RunConfig, seed: u64) -> Result<Self, CliError> {
        let canonical = serde_json::to_string(cfg)?;
        let digest = Sha256::digest(canonical.as_bytes());
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            config_sha256,
            seed,
            timestamp_unix,
        })
    }

    fn header(&self) -> String {
        format!(
            "# tool rydssh\n# version {}\n# command {}\n# config_sha256 {}\n# seed {}\n# timestamp_unix {}\n",
            self.version, self.command, self.config_sha256, self.seed, self.timestamp_unix
        )
    }

    fn json(&self) -> Value {
        json!({
            "tool": "rydssh",
            "version": self.version,
            "command": self.command,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "timestamp_unix": self.timestamp_unix,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// CSV text of one table, preceded by the metadata comment lines.
pub fn table_csv(table: &Table, meta: &Metadata) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv))?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(meta.header() + &String::from_utf8(body).expect("csv output is utf-8"))
}

/// Complete JSON document: metadata, summary and every table.
pub fn document(report: &Report, meta: &Metadata) -> Value {
    let tables: serde_json::Map<String, Value> = report
        .tables
        .iter()
        .map(|t| {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                .collect();
            (
                t.name.clone(),
                json!({ "columns": t.columns, "rows": rows }),
            )
        })
        .collect();
    json!({ "metadata": meta.json(), "summary": report.summary, "tables": tables })
}

fn summary_document(report: &Report, meta: &Metadata) -> Value {
    json!({ "metadata": meta.json(), "summary": report.summary })
}

/// Write `report` into `dir`: one CSV per table plus a summary JSON, or a
/// single JSON document. Returns the written paths.
pub fn write_dir(
    report: &Report,
    meta: &Metadata,
    dir: &Path,
    format: Format,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let command = report.command.replace('-', "_");
    match format {
        Format::Csv => {
            for t in &report.tables {
                let path = dir.join(format!("{}.csv", t.name));
                std::fs::write(&path, table_csv(t, meta)?)?;
                written.push(path);
            }
            let path = dir.join(format!("{command}_summary.json"));
            std::fs::write(
                &path,
                serde_json::to_string_pretty(&summary_document(report, meta))? + "\n",
            )?;
            written.push(path);
        }
        Format::Json => {
            let path = dir.join(format!("{command}.json"));
            std::fs::write(
                &path,
                serde_json::to_string_pretty(&document(report, meta))? + "\n",
            )?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Text for standard output when no directory is given.
pub fn to_stdout(report: &Report, meta: &Metadata, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&document(report, meta))? + "\n"),
        Format::Csv => {
            let mut out = String::new();
            for t in &report.tables {
                out += &format!("# table {}\n", t.name);
                out += &table_csv(t, meta)?;
            }
            Ok(out + &serde_json::to_string_pretty(&summary_document(report, meta))? + "\n")
        }
    }
}
