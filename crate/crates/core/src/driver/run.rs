use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{InitialCondition, SimulationConfig};
use super::diagnostics::{DiagnosticsRecord, LemmaBounds};
use super::output::{write_manifest, write_snapshot};
use crate::ecm::{ic_random, ic_stripes};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, SimState};
use crate::imex::{select_dt, ImexStepper};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub index: usize,
    pub t: f64,
    pub step: usize,
    pub files: Vec<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbortInfo {
    pub step: usize,
    pub t: f64,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub snapshots: Vec<SnapshotRecord>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub lemma_violations: usize,
    /// Smallest value of any field at any step.
    pub min_value: f64,
    pub steps: usize,
    pub wall_time_s: f64,
    pub abort: Option<AbortInfo>,
    pub manifest: Option<PathBuf>,
    pub final_state: SimState,
}

/// Initial state for a configuration; the acidity variant starts from
/// `h0 = 0.2 + p0`.
pub fn initial_state(config: &SimulationConfig) -> Result<SimState> {
    let grid = Grid2D::square(config.grid_n)?;
    let mut state = match config.ic {
        InitialCondition::Stripes => ic_stripes(&grid, config.ic_width),
        InitialCondition::Random => ic_random(&grid, config.seed, config.ic_width, config.ecm_range)?,
    };
    if config.model.has_acidity() {
        let h = state.p.values().iter().map(|p| 0.2 + p).collect();
        state.h = Some(ScalarField::from_values(grid, h)?);
    }
    Ok(state)
}

fn state_min(state: &SimState) -> f64 {
    state.fields().iter().map(|(_, f)| f.stats().min).fold(f64::INFINITY, f64::min)
}

fn check_finite(state: &SimState, step: usize) -> Result<()> {
    match state.fields().into_iter().find(|(_, f)| !f.is_finite()) {
        Some((field, _)) => Err(Error::NonFinite { field, step }),
        None => Ok(()),
    }
}

/// Runs a configuration to `t_end`, writing snapshots and a manifest into
/// `out_dir`. Step sizes are truncated so every snapshot time is hit exactly.
/// On a numerical failure the manifest records the abort before the error is
/// returned.
pub fn run(config: &SimulationConfig) -> Result<RunSummary> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let started = Instant::now();
    let cfg = &config.model;
    let stepper = ImexStepper::default();

    let mut state = initial_state(config)?;
    let grid = *state.grid();
    let bounds = LemmaBounds::from_initial(&state, cfg);
    let mut summary = RunSummary {
        snapshots: Vec::new(),
        diagnostics: Vec::new(),
        lemma_violations: 0,
        min_value: state_min(&state),
        steps: 0,
        wall_time_s: 0.0,
        abort: None,
        manifest: None,
        final_state: state.clone(),
    };
    let record = |summary: &mut RunSummary, state: &SimState, dt: f64, iters: usize| {
        let rec = DiagnosticsRecord::collect(state, summary.steps, dt, iters, bounds, cfg);
        summary.lemma_violations += rec.lemma_bounds.map_or(0, |b| b.violations());
        summary.diagnostics.push(rec);
    };

    let mut pending = config.snapshot_times.iter().copied().enumerate().peekable();
    let mut last_dt = 0.0;
    let mut planned: Option<f64> = None;
    let mut last_iters = 0;
    let outcome: Result<()> = (|| {
        loop {
            while let Some(&(index, t_snap)) = pending.peek() {
                if t_snap > state.t {
                    break;
                }
                let files = write_snapshot(&state, index, &config.out_dir, cfg.h_t_exponent)?;
                summary.snapshots.push(SnapshotRecord { index, t: state.t, step: summary.steps, files });
                record(&mut summary, &state, last_dt, last_iters);
                pending.next();
            }
            if state.t >= config.t_end {
                return Ok(());
            }
            let target = pending.peek().map_or(config.t_end, |&(_, t)| t);
            let mut dt = config.controls.ramp(select_dt(&state, cfg, &config.controls), planned);
            planned = Some(dt);
            let landing = state.t + dt >= target - 1e-12 * target.abs().max(1.0);
            if landing {
                dt = target - state.t;
            }
            let (mut next, stats) = stepper.step(&state, dt, cfg)?;
            summary.steps += 1;
            if landing {
                next.t = target;
            }
            check_finite(&next, summary.steps)?;
            summary.min_value = summary.min_value.min(state_min(&next));
            state = next;
            last_dt = dt;
            last_iters = stats.solver_iterations;
            let snapshot_due = pending.peek().is_some_and(|&(_, t)| t <= state.t);
            if summary.steps.is_multiple_of(config.diagnostics_every) && !snapshot_due {
                record(&mut summary, &state, last_dt, last_iters);
            }
        }
    })();

    summary.wall_time_s = started.elapsed().as_secs_f64();
    if let Err(err) = &outcome {
        summary.abort = Some(AbortInfo { step: summary.steps, t: state.t, message: err.to_string() });
    }
    summary.final_state = state;
    let manifest = write_manifest(config, grid, &summary, &config.out_dir);
    outcome?;
    summary.manifest = Some(manifest?);
    Ok(summary)
}
