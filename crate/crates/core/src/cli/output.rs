//! CSV tables and the run manifest. Every file is written to a temporary
//! name in the target directory and renamed into place.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::{RunPlan, Scenario};
use crate::error::{Error, Result};

/// One cell of a CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

/// Shortest text that parses back to the same f64. Plain notation in the
/// usual range, scientific outside it.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// A table whose header cells read `name[unit]@scenario`.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(scenario: Scenario, columns: &[(&str, &str)]) -> Self {
        Table {
            header: columns.iter().map(|(name, unit)| format!("{name}[{unit}]@{scenario}")).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                match cell {
                    Cell::Real(v) => s.push_str(&format_real(*v)),
                    Cell::Int(v) => write!(s, "{v}").unwrap(),
                    Cell::Empty => {}
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Write `contents` to `dir/name` through a temporary file and return its
/// SHA-256 digest.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<String> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, dir.join(name))?;
    Ok(hex::encode(Sha256::digest(contents)))
}

/// Output files of one run, by name.
#[derive(Debug, Default)]
pub struct OutputSet {
    pub files: BTreeMap<String, String>,
}

impl OutputSet {
    pub fn write_table(&mut self, dir: &Path, name: &str, table: &Table) -> Result<()> {
        let digest = write_atomic(dir, name, table.render().as_bytes())?;
        self.files.insert(name.to_string(), digest);
        Ok(())
    }
}

/// Render the manifest: program version, the completed configuration, the
/// derived grid, and the digest of every output.
pub fn render_manifest(plan: &RunPlan, outputs: &OutputSet) -> Result<String> {
    let mut doc = toml::Table::new();
    let mut run = toml::Table::new();
    run.insert("program".into(), env!("CARGO_PKG_NAME").into());
    run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    run.insert("scenario".into(), plan.config.scenario.to_string().into());
    if let Some((model, n_configs)) = &plan.disorder {
        run.insert("seed".into(), (model.seed as i64).into());
        run.insert("n_configs".into(), (*n_configs as i64).into());
    }
    doc.insert("run".into(), run.into());

    let mut grid = toml::Table::new();
    grid.insert("points".into(), (plan.grid.len() as i64).into());
    grid.insert("start".into(), plan.grid.start().into());
    grid.insert("step".into(), plan.grid.step().into());
    grid.insert("frequency_step".into(), plan.grid.frequency_step().into());
    if let Some(n) = plan.n_atoms {
        grid.insert("n_atoms".into(), (n as i64).into());
    }
    doc.insert("derived".into(), grid.into());

    let config = toml::Value::try_from(&plan.config)
        .map_err(|e| Error::Config { path: String::new(), message: e.to_string() })?;
    doc.insert("config".into(), config);

    let mut files = toml::Table::new();
    for (name, digest) in &outputs.files {
        files.insert(name.clone(), format!("sha256:{digest}").into());
    }
    doc.insert("outputs".into(), files.into());
    toml::to_string(&doc).map_err(|e| Error::Config { path: String::new(), message: e.to_string() })
}
