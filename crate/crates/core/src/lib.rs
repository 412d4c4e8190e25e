//! Finite-volume simulation of a two-phenotype tumor invasion model.
//!
//! Migrating cells `m` diffuse nonlinearly, drift up gradients of the
//! extracellular matrix `v` (haptotaxis) and away from proliferating cells `p`
//! or acidity `h`. Phenotype switching is driven by equilibrium receptor
//! occupancy. Space is discretized with MC-limited central-upwind finite
//! volumes on a uniform grid; time with an additive IMEX Runge-Kutta scheme
//! whose implicit diffusion stages are solved by BiCGSTAB.

pub mod discretization;
pub mod driver;
pub mod ecm;
pub mod error;
pub mod grid;
pub mod imex;
pub mod kinetics;
pub mod linsolve;
pub mod sparse;

pub use discretization::{
    advection_divergence, advective_flux, diffusion_operator, explicit_rhs, interface_velocity, mc_slope,
    EdgeField, Species, Tendencies,
};
pub use driver::{preset, run, DiagnosticsRecord, Experiment, InitialCondition, Manifest, RunSummary, SimulationConfig};
pub use ecm::{generate_random_ecm, ic_random, ic_stripes, CoarseMatrix, SplitMix64};
pub use error::{Error, Result};
pub use grid::{Direction, FieldStats, Grid2D, ScalarField, SimState};
pub use imex::{imex_step, select_dt, tableau, ButcherTableauPair, ImexStepper, StepControls};
pub use kinetics::{
    diffusion_coeff, ph_level, receptor_equilibrium, receptor_ode_rhs, taxis_sensitivities, transition_rates,
    wellposedness_margin, ModelConfig, ReceptorState,
};
pub use linsolve::{bicgstab, SolveReport, SolveStatus, SolverOptions};
pub use sparse::SparseOperator;
