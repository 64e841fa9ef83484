//! CSV artifacts and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// A CSV cell.
pub enum Cell {
    Float(f64),
    Int(usize),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

/// Scientific notation with 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        // Drop the sign of negative zero.
        format!("{:.11e}", x + 0.0)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(x) => x.to_string(),
            Cell::Bool(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Table with a fixed header, rendered in row order.
pub struct Table {
    pub name: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self {
            name: name.to_owned(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<C: Serialize, D: Serialize> {
    pub version: &'static str,
    pub subcommand: String,
    pub config: C,
    pub derived: D,
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: f64,
}

pub fn write_tables(dir: &Path, tables: &[Table]) -> Result<Vec<Artifact>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    tables
        .iter()
        .map(|t| {
            let file = format!("{}.csv", t.name);
            let body = t.render();
            let path: PathBuf = dir.join(&file);
            fs::write(&path, &body).map_err(|e| CliError::io(&path, e))?;
            Ok(Artifact {
                file,
                rows: t.len(),
                sha256: hex::encode(Sha256::digest(body.as_bytes())),
            })
        })
        .collect()
}

pub fn write_manifest<C: Serialize, D: Serialize>(dir: &Path, manifest: &RunManifest<C, D>) -> Result<(), CliError> {
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Numeric(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))
}
