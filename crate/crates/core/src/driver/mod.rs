//! Experiment presets, the simulation loop, diagnostics and file output.

mod config;
mod diagnostics;
mod output;
mod run;

pub use config::{preset, Experiment, InitialCondition, SimulationConfig, DEFAULT_SNAPSHOT_TIMES};
pub use diagnostics::{DiagnosticsRecord, LemmaBounds, BOUND_SLACK};
pub use output::{read_field_csv, write_field_csv, write_manifest, write_snapshot, Manifest, FORMAT_VERSION};
pub use run::{initial_state, run, AbortInfo, RunSummary, SnapshotRecord};
