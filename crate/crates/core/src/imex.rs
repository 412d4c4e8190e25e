//! Additive IMEX Runge-Kutta time stepping with the four-stage, third-order,
//! L-stable and stiffly accurate ARK3(2)4L[2]SA coefficients of Kennedy and
//! Carpenter. Advection and reactions are explicit; diffusion is implicit and
//! linearized by freezing the diffusion coefficient at each stage's explicit
//! predictor, so every stage needs one sparse linear solve per diffusing
//! species.

use serde::{Deserialize, Serialize};

use crate::discretization::{assemble_laplacian, cell_state, explicit_rhs_with, interface_velocity};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, SimState};
use crate::kinetics::{diffusion_coeff, ModelConfig};
use crate::linsolve::{bicgstab, SolveStatus, SolverOptions};
use crate::sparse::SparseOperator;

pub const STAGES: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableauPair {
    /// Strictly lower-triangular explicit coefficients.
    pub a_exp: [[f64; STAGES]; STAGES],
    /// Lower-triangular implicit coefficients (first diagonal entry zero).
    pub a_imp: [[f64; STAGES]; STAGES],
    /// Weights shared by both parts.
    pub b: [f64; STAGES],
    pub c: [f64; STAGES],
}

const fn q(num: i64, den: i64) -> f64 {
    num as f64 / den as f64
}

pub fn tableau() -> ButcherTableauPair {
    let gamma = q(1767732205903, 4055673282236);
    let b = [
        q(1471266399579, 7840856788654),
        q(-4482444167858, 7529755066697),
        q(11266239266428, 11593286722821),
        gamma,
    ];
    ButcherTableauPair {
        a_exp: [
            [0.0; 4],
            [q(1767732205903, 2027836641118), 0.0, 0.0, 0.0],
            [q(5535828885825, 10492691773637), q(788022342437, 10882634858940), 0.0, 0.0],
            [
                q(6485989280629, 16251701735622),
                q(-4246266847089, 9704473918619),
                q(10755448449292, 10357097424841),
                0.0,
            ],
        ],
        a_imp: [
            [0.0; 4],
            [gamma, gamma, 0.0, 0.0],
            [q(2746238789719, 10658868560708), q(-640167445237, 6845629431997), gamma, 0.0],
            b,
        ],
        b,
        c: [0.0, q(1767732205903, 2027836641118), 0.6, 1.0],
    }
}

/// A system `w' = E(w) + I(w)` split into an explicit part and a linear (or
/// linearized) implicit part, with `w` a list of components.
pub trait ImexProblem {
    fn explicit(&mut self, w: &[Vec<f64>]) -> Vec<Vec<f64>>;

    /// Implicit operator per component, lagged at `predictor`; `None` for
    /// components without an implicit term.
    fn implicit_operators(&mut self, predictor: &[Vec<f64>]) -> Result<Vec<Option<SparseOperator>>>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub solver_iterations: usize,
    pub max_residual: f64,
}

/// One ARK step from `w` with step size `dt`.
pub fn ark_step<P: ImexProblem>(
    problem: &mut P,
    w: &[Vec<f64>],
    dt: f64,
    tab: &ButcherTableauPair,
    opts: SolverOptions,
) -> Result<(Vec<Vec<f64>>, StepStats)> {
    let ncomp = w.len();
    let mut stats = StepStats::default();
    let mut explicit_terms: Vec<Vec<Vec<f64>>> = Vec::with_capacity(STAGES);
    let mut implicit_terms: Vec<Vec<Vec<f64>>> = Vec::with_capacity(STAGES);
    let mut prev_stage: Vec<Vec<f64>> = w.to_vec();

    for i in 0..STAGES {
        // explicit predictor W*_i
        let mut predictor = w.to_vec();
        for (j, e) in explicit_terms.iter().enumerate() {
            let coef = dt * tab.a_exp[i][j];
            if coef != 0.0 {
                axpy_components(&mut predictor, coef, e);
            }
        }
        let operators = problem.implicit_operators(&predictor)?;
        let mut rhs = predictor;
        for (j, imp) in implicit_terms.iter().enumerate() {
            let coef = dt * tab.a_imp[i][j];
            if coef != 0.0 {
                axpy_components(&mut rhs, coef, imp);
            }
        }

        let diag = dt * tab.a_imp[i][i];
        let mut stage = Vec::with_capacity(ncomp);
        let mut stage_implicit = Vec::with_capacity(ncomp);
        for (k, (rhs_k, op)) in rhs.into_iter().zip(operators).enumerate() {
            match op {
                Some(l) => {
                    let solution = if diag == 0.0 {
                        rhs_k
                    } else {
                        let system = l.identity_minus(diag);
                        let (x, report) = bicgstab(&system, &rhs_k, &prev_stage[k], opts);
                        stats.solver_iterations += report.iterations;
                        stats.max_residual = stats.max_residual.max(report.residual_norm);
                        if report.status != SolveStatus::Converged {
                            return Err(Error::SolverFailure {
                                status: report.status,
                                iterations: report.iterations,
                                residual: report.residual_norm,
                            });
                        }
                        x
                    };
                    stage_implicit.push(l.mul_vec(&solution));
                    stage.push(solution);
                }
                None => {
                    stage_implicit.push(vec![0.0; rhs_k.len()]);
                    stage.push(rhs_k);
                }
            }
        }
        explicit_terms.push(problem.explicit(&stage));
        implicit_terms.push(stage_implicit);
        prev_stage = stage;
    }

    let mut next = w.to_vec();
    for i in 0..STAGES {
        let coef = dt * tab.b[i];
        axpy_components(&mut next, coef, &explicit_terms[i]);
        axpy_components(&mut next, coef, &implicit_terms[i]);
    }
    Ok((next, stats))
}

fn axpy_components(y: &mut [Vec<f64>], a: f64, x: &[Vec<f64>]) {
    for (yc, xc) in y.iter_mut().zip(x) {
        for (yi, xi) in yc.iter_mut().zip(xc) {
            *yi += a * xi;
        }
    }
}

/// The tumor model as an [`ImexProblem`]: components m, p, v[, h]; m always
/// diffuses, h diffuses with constant `d_h`, p and v are purely explicit.
struct TumorProblem<'a> {
    cfg: &'a ModelConfig,
    grid: Grid2D,
    t: f64,
}

impl TumorProblem<'_> {
    fn state(&self, w: &[Vec<f64>]) -> SimState {
        SimState::from_components(self.grid, w.to_vec(), self.t)
    }
}

impl ImexProblem for TumorProblem<'_> {
    fn explicit(&mut self, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let state = self.state(w);
        let velocity = interface_velocity(&state, self.cfg);
        explicit_rhs_with(&state, self.cfg, &velocity).into_components()
    }

    fn implicit_operators(&mut self, predictor: &[Vec<f64>]) -> Result<Vec<Option<SparseOperator>>> {
        let state = self.state(predictor);
        let coeffs: Vec<f64> = (0..self.grid.len())
            .map(|k| {
                let c = cell_state(&state, k);
                diffusion_coeff(c.m, c.p, c.v, self.cfg)
            })
            .collect();
        let mut ops = vec![Some(assemble_laplacian(&self.grid, &coeffs)), None, None];
        if predictor.len() > 3 {
            ops.push(Some(assemble_laplacian(&self.grid, &vec![self.cfg.d_h; self.grid.len()])));
        }
        Ok(ops)
    }
}

/// Reusable stepper holding the tableau and linear-solver settings.
#[derive(Clone, Debug)]
pub struct ImexStepper {
    pub tableau: ButcherTableauPair,
    pub solver: SolverOptions,
}

impl Default for ImexStepper {
    fn default() -> Self {
        Self { tableau: tableau(), solver: SolverOptions::default() }
    }
}

impl ImexStepper {
    pub fn step(&self, state: &SimState, dt: f64, cfg: &ModelConfig) -> Result<(SimState, StepStats)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let mut problem = TumorProblem { cfg, grid: *state.grid(), t: state.t };
        let (next, stats) = ark_step(&mut problem, &state.components(), dt, &self.tableau, self.solver)?;
        Ok((SimState::from_components(*state.grid(), next, state.t + dt), stats))
    }
}

pub fn imex_step(state: &SimState, dt: f64, cfg: &ModelConfig) -> Result<SimState> {
    ImexStepper::default().step(state, dt, cfg).map(|(s, _)| s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControls {
    /// Advective Courant number.
    pub cfl: f64,
    pub dt_max: f64,
    /// Fixed step overriding the CFL rule.
    pub dt_fixed: Option<f64>,
    /// Cap on the first adaptive step.
    #[serde(default = "default_dt_initial")]
    pub dt_initial: f64,
    /// Largest ratio between consecutive adaptive steps.
    #[serde(default = "default_max_growth")]
    pub max_growth: f64,
}

fn default_dt_initial() -> f64 {
    2.5e-4
}

fn default_max_growth() -> f64 {
    2.0
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            dt_max: 0.01,
            dt_fixed: None,
            dt_initial: default_dt_initial(),
            max_growth: default_max_growth(),
        }
    }
}

impl StepControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::Config(format!("dt_max must be > 0, got {}", self.dt_max)));
        }
        if let Some(dt) = self.dt_fixed {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("fixed dt must be > 0, got {dt}")));
            }
        }
        if !(self.dt_initial > 0.0) || !(self.max_growth >= 1.0) {
            return Err(Error::Config(format!(
                "need dt_initial > 0 and max_growth >= 1, got {} and {}",
                self.dt_initial, self.max_growth
            )));
        }
        Ok(())
    }

    /// Limits an adaptive step `dt` given the previous one, so a run starts
    /// at `dt_initial` and grows by at most `max_growth` per step. Fixed
    /// steps pass through.
    pub fn ramp(&self, dt: f64, previous: Option<f64>) -> f64 {
        if self.dt_fixed.is_some() {
            return dt;
        }
        dt.min(previous.map_or(self.dt_initial, |p| p * self.max_growth))
    }
}

/// `min(dt_max, cfl h / max|a|)` over all face velocities, unless a fixed
/// step is set.
pub fn select_dt(state: &SimState, cfg: &ModelConfig, controls: &StepControls) -> f64 {
    if let Some(dt) = controls.dt_fixed {
        return dt;
    }
    let max_speed = interface_velocity(state, cfg).max_abs();
    dt_from_speed(max_speed, state.grid().h, controls)
}

pub(crate) fn dt_from_speed(max_speed: f64, h: f64, controls: &StepControls) -> f64 {
    if max_speed > 0.0 {
        controls.dt_max.min(controls.cfl * h / max_speed)
    } else {
        controls.dt_max
    }
}
