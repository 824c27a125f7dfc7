//! Deterministic table output: CSV with 17-significant-digit floats, or
//! the same rows as a JSON array.

use std::io::Write;
use std::path::{Path, PathBuf};

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Float(x) => format!("{:.16e}", x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Float(x) => serde_json::json!(x),
            Cell::Int(i) => serde_json::json!(i),
            Cell::Text(s) => serde_json::json!(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => anyhow::bail!("unknown output format '{}'", other),
        }
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, format: Format) -> anyhow::Result<()> {
        let mut out = Vec::new();
        match format {
            Format::Csv => {
                writeln!(&mut out, "{}", self.header.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::to_csv).collect();
                    writeln!(&mut out, "{}", cells.join(","))?;
                }
            }
            Format::Json => {
                let objects: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map: serde_json::Map<String, serde_json::Value> = self
                            .header
                            .iter()
                            .zip(row)
                            .map(|(k, c)| (k.clone(), c.to_json()))
                            .collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                out = serde_json::to_vec_pretty(&objects)?;
                out.push(b'\n');
            }
        }
        std::fs::write(path, out)
            .map_err(|e| anyhow::anyhow!(std::io::Error::new(e.kind(), format!("{}: {}", path.display(), e))))?;
        Ok(())
    }
}

/// Resolve an output file name against the default output directory.
pub fn resolve_output(name: &str) -> PathBuf {
    let p = PathBuf::from(name);
    if p.is_absolute() || p.components().count() > 1 {
        return p;
    }
    match std::env::var_os("FBDD_OUT_DIR") {
        Some(dir) => PathBuf::from(dir).join(p),
        None => p,
    }
}
