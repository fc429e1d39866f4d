//! Tables, CSV / gnuplot emission and the JSON run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

/// Bumped whenever a manifest field changes meaning.
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    /// Shortest representation that parses back to the same value.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
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

/// One output data family.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Also emit a whitespace-separated `.dat` file for gnuplot.
    pub plot: bool,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            plot: false,
        }
    }

    pub fn plotted(mut self) -> Self {
        self.plot = true;
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| LabError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| LabError::Io(e.to_string()))
    }

    /// gnuplot column text: `#`-prefixed header, text cells quoted.
    pub fn to_dat(&self) -> String {
        let mut s = format!("# {}\n", self.columns.join(" "));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Text(t) => format!("\"{}\"", t.replace('"', "'")),
                    other => other.render(),
                })
                .collect();
            let _ = writeln!(s, "{}", cells.join(" "));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub rows: usize,
    pub columns: Vec<String>,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub experiment: String,
    pub name: Option<String>,
    /// SHA-256 of the config text plus the effective seed.
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputFile>,
    pub summaries: BTreeMap<String, f64>,
    /// `ok` or `violated`.
    pub status: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes every table under `dir` and returns the manifest entries.
pub fn write_tables(dir: &Path, tables: &[Table]) -> Result<Vec<OutputFile>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for t in tables {
        let csv = t.to_csv()?;
        let file = format!("{}.csv", t.name);
        std::fs::write(dir.join(&file), &csv)?;
        out.push(OutputFile {
            path: file,
            rows: t.rows.len(),
            columns: t.columns.clone(),
            sha256: sha256_hex(&csv),
        });
        if t.plot {
            let dat = t.to_dat();
            let file = format!("{}.dat", t.name);
            std::fs::write(dir.join(&file), dat.as_bytes())?;
            out.push(OutputFile {
                path: file,
                rows: t.rows.len(),
                columns: t.columns.clone(),
                sha256: sha256_hex(dat.as_bytes()),
            });
        }
    }
    Ok(out)
}

pub fn write_manifest(dir: &Path, m: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(m).map_err(|e| LabError::Io(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(())
}

/// Reads a CSV written by [`write_tables`] back as header plus string rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let io = |e: csv::Error| LabError::Io(e.to_string());
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let header = r.headers().map_err(io)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|x| x.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(io)?;
    Ok((header, rows))
}
