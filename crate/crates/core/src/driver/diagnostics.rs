use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid::{FieldStats, SimState};
use crate::kinetics::{
    p_bound, wellposedness_margin, ModelConfig, ProliferationKind, RateKind, RemodelingKind,
};

/// Slack allowed above the a-priori bounds before a violation is flagged.
pub const BOUND_SLACK: f64 = 1e-6;

/// A-priori bounds `max p <= A`, `max v <= L`, `int m <= B` valid for
/// constant switch rates, and whether the current state violates them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaBounds {
    pub a: f64,
    pub l: f64,
    pub b: f64,
    pub p_violated: bool,
    pub v_violated: bool,
    pub m_mass_violated: bool,
}

impl LemmaBounds {
    /// Bounds from the initial state; `None` for variants they do not cover.
    pub fn from_initial(initial: &SimState, cfg: &ModelConfig) -> Option<Self> {
        let covered = cfg.rate_kind == RateKind::Constant
            && cfg.proliferation_kind == ProliferationKind::Standard
            && cfg.remodeling_kind == RemodelingKind::TissueDriven
            && !cfg.has_acidity()
            && cfg.mu > 0.0
            && cfg.gamma0 > 0.0;
        if !covered {
            return None;
        }
        let a = p_bound(initial.p.stats().max, cfg);
        let l = initial.v.stats().max.max(1.0);
        let area = initial.grid().area();
        let b = initial.m.integrate().max(cfg.lambda0 * a * area / cfg.gamma0);
        Some(Self { a, l, b, p_violated: false, v_violated: false, m_mass_violated: false })
    }

    pub fn check(mut self, state: &SimState) -> Self {
        self.p_violated = state.p.stats().max > self.a + BOUND_SLACK;
        self.v_violated = state.v.stats().max > self.l + BOUND_SLACK;
        self.m_mass_violated = state.m.integrate() > self.b + BOUND_SLACK;
        self
    }

    pub fn violations(&self) -> usize {
        [self.p_violated, self.v_violated, self.m_mass_violated].iter().filter(|&&v| v).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: usize,
    pub fields: BTreeMap<String, FieldStats>,
    pub lemma_bounds: Option<LemmaBounds>,
    pub wellposedness_margin: Option<f64>,
    /// Step size of the most recent step (0 before the first step).
    pub dt: f64,
    /// Linear-solver iterations of the most recent step.
    pub solver_iterations: usize,
}

impl DiagnosticsRecord {
    pub fn collect(
        state: &SimState,
        step: usize,
        dt: f64,
        solver_iterations: usize,
        bounds: Option<LemmaBounds>,
        cfg: &ModelConfig,
    ) -> Self {
        let fields = state.fields().into_iter().map(|(name, f)| (name.to_string(), f.stats())).collect();
        Self {
            t: state.t,
            step,
            fields,
            lemma_bounds: bounds.map(|b| b.check(state)),
            wellposedness_margin: wellposedness_margin(cfg, state).ok(),
            dt,
            solver_iterations,
        }
    }

    pub fn min_value(&self) -> f64 {
        self.fields.values().map(|s| s.min).fold(f64::INFINITY, f64::min)
    }
}
