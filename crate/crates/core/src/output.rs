//! Deterministic CSV/JSON artifacts and grid exclusion windows.

use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Half-width of the window removed around `E = 0` and each stationary energy.
pub const EXCLUSION_HALF_WIDTH: f64 = 1e-6;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // normalizes -0.0 for byte-stable output
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// In-memory CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
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
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Write `contents` to a temporary sibling and rename it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_error(&tmp, e))?;
        f.write_all(contents).map_err(|e| io_error(&tmp, e))?;
        f.sync_all().map_err(|e| io_error(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    write_atomic(path, table.render().as_bytes())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// A grid point removed by an exclusion window.
#[derive(Debug, Clone, PartialEq)]
pub struct Excluded {
    pub energy: f64,
    /// Center of the window that removed it.
    pub center: f64,
}

/// Split `grid` into points kept and points within `half_width` of 0 or of
/// one of `singular`.
pub fn apply_exclusions(grid: &[f64], singular: &[f64], half_width: f64) -> (Vec<f64>, Vec<Excluded>) {
    let mut kept = Vec::with_capacity(grid.len());
    let mut dropped = Vec::new();
    for &e in grid {
        let hit = std::iter::once(0.0)
            .chain(singular.iter().copied())
            .find(|c| (e - c).abs() <= half_width);
        match hit {
            Some(center) => dropped.push(Excluded { energy: e, center }),
            None => kept.push(e),
        }
    }
    (kept, dropped)
}

/// Sidecar path listing excluded points for a given artifact.
pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let stem = artifact.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    artifact.with_file_name(format!("{stem}_excluded.csv"))
}

pub fn exclusion_table(excluded: &[Excluded]) -> Table {
    let mut t = Table::new(&["E", "window_center"]);
    for x in excluded {
        t.push(vec![x.energy.into(), x.center.into()]);
    }
    t
}
