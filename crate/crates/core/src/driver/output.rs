use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::SimulationConfig;
use super::diagnostics::DiagnosticsRecord;
use super::run::{AbortInfo, RunSummary, SnapshotRecord};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, SimState};
use crate::kinetics::ph_level;

pub const FORMAT_VERSION: u32 = 1;

/// Writes `values` (row-major, x fastest) as `ny` lines of `nx`
/// comma-separated numbers with 17 significant digits, y ascending.
pub fn write_field_csv(path: &Path, nx: usize, values: &[f64]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut line = String::with_capacity(nx * 24);
    for row in values.chunks(nx) {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a field file written by [`write_field_csv`]; returns `(nx, values)`.
pub fn read_field_csv(path: &Path) -> Result<(usize, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut nx = 0;
    let mut values = Vec::new();
    for line in text.lines() {
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        nx = row.len();
        values.extend(row);
    }
    Ok((nx, values))
}

/// One CSV per field, named `<field>_<index>.csv`; the acidity variant adds
/// `h` and the derived `ph`.
pub fn write_snapshot(state: &SimState, index: usize, dir: &Path, h_t_exponent: f64) -> Result<Vec<PathBuf>> {
    let nx = state.grid().nx;
    let mut paths = Vec::new();
    for (name, field) in state.fields() {
        let path = dir.join(format!("{name}_{index}.csv"));
        write_field_csv(&path, nx, field.values())?;
        paths.push(path);
    }
    if let Some(h) = &state.h {
        let ph = ph_field(h, h_t_exponent)?;
        let path = dir.join(format!("ph_{index}.csv"));
        write_field_csv(&path, nx, ph.values())?;
        paths.push(path);
    }
    Ok(paths)
}

pub(crate) fn ph_field(h: &ScalarField, h_t_exponent: f64) -> Result<ScalarField> {
    let values = h.values().iter().map(|&v| ph_level(v, h_t_exponent)).collect::<Result<Vec<_>>>()?;
    ScalarField::from_values(*h.grid(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub grid: Grid2D,
    pub config: SimulationConfig,
    pub snapshots: Vec<SnapshotRecord>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub lemma_violations: usize,
    pub min_value: f64,
    pub steps: usize,
    pub wall_time_s: f64,
    pub abort: Option<AbortInfo>,
}

impl Manifest {
    pub fn new(config: &SimulationConfig, grid: Grid2D, summary: &RunSummary) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            grid,
            config: config.clone(),
            snapshots: summary.snapshots.clone(),
            diagnostics: summary.diagnostics.clone(),
            lemma_violations: summary.lemma_violations,
            min_value: summary.min_value,
            steps: summary.steps,
            wall_time_s: summary.wall_time_s,
            abort: summary.abort.clone(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn write_manifest(config: &SimulationConfig, grid: Grid2D, summary: &RunSummary, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&Manifest::new(config, grid, summary))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
