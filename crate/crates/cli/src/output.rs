use crate::error::CliError;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// A directory receiving CSV tables, each with a `<name>.json` sidecar.
pub struct OutputDir {
    root: PathBuf,
    provenance: Value,
}

impl OutputDir {
    /// `provenance` is copied into every sidecar.
    pub fn create(root: &Path, provenance: Value) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), provenance })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes `<name>.csv` and `<name>.json`. Floats use the shortest
    /// representation that round-trips, so equal inputs give equal bytes.
    pub fn write_table(&self, name: &str, columns: &[&str], rows: &[Vec<Cell>], meta: Value) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(self.path(&format!("{name}.csv")))?;
        w.write_record(columns)?;
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        let sidecar = json!({
            "table": format!("{name}.csv"),
            "columns": columns,
            "rows": rows.len(),
            "provenance": self.provenance,
            "meta": meta,
        });
        self.write_json(name, &sidecar)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        self.write_text(&format!("{name}.json"), &text)
    }

    pub fn write_text(&self, file: &str, text: &str) -> Result<(), CliError> {
        let p = self.path(file);
        std::fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }
}

pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => u8::from(*v).to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$($crate::output::Cell::from($v)),*] };
}
