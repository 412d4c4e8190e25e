//! Pointwise model physics: receptor equilibria, taxis sensitivities,
//! phenotype switch rates, the nonlinear diffusion coefficient and the
//! reaction terms of every model variant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SimState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensitivityKind {
    /// chi1 = y_bar, chi2 = zeta_bar.
    EquilibriumValues,
    /// chi1 = xi1 * d(y_bar)/dv, chi2 = xi2 * d(zeta_bar)/dp.
    EquilibriumDerivatives,
    /// chi1 = c1 v / (1 + v), chi2 = c2.
    SimplifiedRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateKind {
    Constant,
    Dynamic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffusionKind {
    NonDegenerate,
    Degenerate,
    Constant,
}

/// Denominator of the non-degenerate diffusion coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DenominatorForm {
    /// `1 + m (p + v)`
    Section2,
    /// `1 + m v + p v`
    AppendixB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RemodelingKind {
    TissueDriven,
    CellDriven,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProliferationKind {
    Standard,
    Anoikis,
    AcidityDependent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepellentTarget {
    ProliferatingCells,
    Acidity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelFamily {
    Full,
    SimplifiedAnalysis,
}

/// Every rate constant and variant selector of the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d_c: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub k_d: f64,
    /// Proliferation rate; doubles as `mu0` in the acidity-dependent form.
    pub mu: f64,
    pub mu_v: f64,
    pub delta: f64,
    pub lambda0: f64,
    pub gamma0: f64,
    // dynamic switch rates
    pub b: f64,
    pub p_shape: f64,
    pub mu_y: f64,
    pub mu_zeta: f64,
    pub sigma_y: f64,
    pub sigma_zeta: f64,
    pub y_ref: f64,
    // acidity
    pub d_h: f64,
    pub alpha_h: f64,
    pub beta_h: f64,
    pub h_t_exponent: f64,
    /// Use `mu0 (1 - h)_+` instead of `mu0 (h - 1)_+`.
    pub acidity_inhibits_proliferation: bool,
    // simplified analysis system
    pub c1: f64,
    pub c2: f64,
    pub eta1: f64,
    pub alpha_s: f64,
    pub beta_s: f64,

    pub sensitivity_kind: SensitivityKind,
    pub rate_kind: RateKind,
    pub diffusion_kind: DiffusionKind,
    pub denominator_form: DenominatorForm,
    pub remodeling_kind: RemodelingKind,
    pub proliferation_kind: ProliferationKind,
    pub repellent_target: RepellentTarget,
    pub model_family: ModelFamily,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            d_c: 0.001,
            xi1: 0.4,
            xi2: 0.1,
            k_d: 1.0,
            mu: 0.1,
            mu_v: 0.15,
            delta: 0.3,
            lambda0: 0.01,
            gamma0: 0.002,
            b: 2.0,
            p_shape: 2.0,
            mu_y: 2.0,
            mu_zeta: 2.0,
            sigma_y: 0.5,
            sigma_zeta: 0.3,
            y_ref: 0.6,
            d_h: 0.07,
            alpha_h: 0.55,
            beta_h: 0.05,
            h_t_exponent: 6.4,
            acidity_inhibits_proliferation: false,
            c1: 1.0,
            c2: 0.05,
            eta1: 1.0,
            alpha_s: 0.3,
            beta_s: 0.3,
            sensitivity_kind: SensitivityKind::EquilibriumDerivatives,
            rate_kind: RateKind::Constant,
            diffusion_kind: DiffusionKind::NonDegenerate,
            denominator_form: DenominatorForm::Section2,
            remodeling_kind: RemodelingKind::TissueDriven,
            proliferation_kind: ProliferationKind::Standard,
            repellent_target: RepellentTarget::ProliferatingCells,
            model_family: ModelFamily::Full,
        }
    }
}

impl ModelConfig {
    pub fn has_acidity(&self) -> bool {
        self.repellent_target == RepellentTarget::Acidity
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("d_c", self.d_c),
            ("xi1", self.xi1),
            ("xi2", self.xi2),
            ("mu", self.mu),
            ("mu_v", self.mu_v),
            ("delta", self.delta),
            ("lambda0", self.lambda0),
            ("gamma0", self.gamma0),
            ("b", self.b),
            ("c1", self.c1),
            ("c2", self.c2),
            ("eta1", self.eta1),
            ("alpha_s", self.alpha_s),
            ("beta_s", self.beta_s),
        ];
        for (name, value) in nonneg {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {value}")));
            }
        }
        if !(self.k_d > 0.0) {
            return Err(Error::Config(format!("k_d must be > 0, got {}", self.k_d)));
        }
        if !(self.sigma_y > 0.0 && self.sigma_zeta > 0.0) {
            return Err(Error::Config("sigma_y and sigma_zeta must be > 0".into()));
        }
        if !(self.p_shape >= 1.0) {
            return Err(Error::Config(format!("p_shape must be >= 1, got {}", self.p_shape)));
        }
        if self.has_acidity() {
            for (name, value) in [("d_h", self.d_h), ("alpha_h", self.alpha_h), ("beta_h", self.beta_h)] {
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(Error::Config(format!("{name} must be finite and >= 0, got {value}")));
                }
            }
        } else if self.proliferation_kind == ProliferationKind::AcidityDependent {
            return Err(Error::Config(
                "acidity-dependent proliferation requires repellent_target = Acidity".into(),
            ));
        }
        if self.model_family == ModelFamily::SimplifiedAnalysis && self.has_acidity() {
            return Err(Error::Config("the simplified analysis system has no acidity".into()));
        }
        Ok(())
    }
}

/// Fractions of receptors bound to tissue (`y`) and to cells (`zeta`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReceptorState {
    pub y: f64,
    pub zeta: f64,
}

/// Densities of one cell.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CellState {
    pub m: f64,
    pub p: f64,
    pub v: f64,
    pub h: Option<f64>,
}

impl CellState {
    pub fn new(m: f64, p: f64, v: f64) -> Self {
        Self { m, p, v, h: None }
    }

    pub fn with_acidity(m: f64, p: f64, v: f64, h: f64) -> Self {
        Self { m, p, v, h: Some(h) }
    }

    /// Same state with every density floored at zero. Coefficient functions
    /// are evaluated on this so that round-off undershoots cannot produce
    /// negative diffusivities or sensitivities.
    #[inline]
    pub(crate) fn nonneg(self) -> Self {
        Self {
            m: self.m.max(0.0),
            p: self.p.max(0.0),
            v: self.v.max(0.0),
            h: self.h.map(|h| h.max(0.0)),
        }
    }

    pub(crate) fn mean(a: Self, b: Self) -> Self {
        Self {
            m: 0.5 * (a.m + b.m),
            p: 0.5 * (a.p + b.p),
            v: 0.5 * (a.v + b.v),
            h: a.h.zip(b.h).map(|(x, y)| 0.5 * (x + y)),
        }
    }
}

/// Rates of change of each species at one cell.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Reactions {
    pub m: f64,
    pub p: f64,
    pub v: f64,
    pub h: Option<f64>,
}

pub fn receptor_equilibrium(m: f64, p: f64, v: f64, k_d: f64) -> Result<ReceptorState> {
    if m < 0.0 || p < 0.0 || v < 0.0 {
        return Err(Error::NegativeDensity(format!("(m, p, v) = ({m}, {p}, {v})")));
    }
    if !(k_d > 0.0) {
        return Err(Error::InvalidArgument(format!("k_d must be > 0, got {k_d}")));
    }
    Ok(equilibrium(m, p, v, k_d))
}

#[inline]
fn equilibrium(m: f64, p: f64, v: f64, k_d: f64) -> ReceptorState {
    let denom = k_d + m + p + v;
    ReceptorState { y: v / denom, zeta: (m + p) / denom }
}

/// Right-hand side of the receptor binding kinetics.
pub fn receptor_ode_rhs(s: ReceptorState, m: f64, p: f64, v: f64, k_plus: f64, k_minus: f64) -> (f64, f64) {
    let free = 1.0 - s.y - s.zeta;
    (
        k_plus * free * v - k_minus * s.y,
        k_plus * free * (m + p) - k_minus * s.zeta,
    )
}

pub fn diffusion_coeff(m: f64, p: f64, v: f64, cfg: &ModelConfig) -> f64 {
    let (m, p, v) = (m.max(0.0), p.max(0.0), v.max(0.0));
    let pair_sum = m * p + m * v + p * v;
    match cfg.diffusion_kind {
        DiffusionKind::Constant => cfg.d_c,
        DiffusionKind::Degenerate => cfg.d_c * pair_sum / (1.0 + m * v + p * v),
        DiffusionKind::NonDegenerate => {
            let denom = match cfg.denominator_form {
                DenominatorForm::Section2 => 1.0 + m * (p + v),
                DenominatorForm::AppendixB => 1.0 + m * v + p * v,
            };
            cfg.d_c * (1.0 + pair_sum) / denom
        }
    }
}

/// Haptotactic (`chi1`) and repellent (`chi2`) sensitivities.
pub fn taxis_sensitivities(m: f64, p: f64, v: f64, cfg: &ModelConfig) -> (f64, f64) {
    let (m, p, v) = (m.max(0.0), p.max(0.0), v.max(0.0));
    match cfg.sensitivity_kind {
        SensitivityKind::EquilibriumValues => {
            let s = equilibrium(m, p, v, cfg.k_d);
            (s.y, s.zeta)
        }
        SensitivityKind::EquilibriumDerivatives => {
            let denom = cfg.k_d + m + p + v;
            let d2 = denom * denom;
            (cfg.xi1 * (cfg.k_d + m + p) / d2, cfg.xi2 * (cfg.k_d + v) / d2)
        }
        SensitivityKind::SimplifiedRational => (cfg.c1 * v / (1.0 + v), cfg.c2),
    }
}

/// Gamma function; exact factorial for small integer arguments.
pub(crate) fn gamma_fn(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=20.0).contains(&x) {
        (1..x as u64).map(|k| k as f64).product()
    } else {
        statrs::function::gamma::gamma(x)
    }
}

/// Phenotype switch rates `(lambda, gamma)`: proliferating-to-migrating and
/// migrating-to-proliferating.
pub fn transition_rates(s: ReceptorState, cfg: &ModelConfig) -> (f64, f64) {
    match cfg.rate_kind {
        RateKind::Constant => (cfg.lambda0, cfg.gamma0),
        RateKind::Dynamic => {
            let y = s.y.max(0.0);
            let zeta = s.zeta.max(0.0);
            let shape = cfg.gamma0 * cfg.b.powf(cfg.p_shape) / gamma_fn(cfg.p_shape)
                * y.powf(cfg.p_shape - 1.0)
                * (-cfg.b * y).exp();
            let dy = (y - cfg.mu_y) / cfg.sigma_y;
            let dz = (zeta - cfg.mu_zeta) / cfg.sigma_zeta;
            let bump = cfg.gamma0 / (2.0 * std::f64::consts::PI * cfg.sigma_y * cfg.sigma_zeta)
                * (-0.5 * dy * dy - 0.5 * dz * dz).exp();
            let gamma = shape + bump;
            let mx = (zeta - y).max(y - cfg.y_ref);
            let lambda = 2.0 * gamma / (1.0 + (-mx).exp());
            (lambda, gamma)
        }
    }
}

/// Effective proliferation rate; the anoikis factor `v` is applied in
/// [`reaction_terms`], not here.
pub fn proliferation_rate(_v: f64, h: Option<f64>, cfg: &ModelConfig) -> f64 {
    match cfg.proliferation_kind {
        ProliferationKind::Standard | ProliferationKind::Anoikis => cfg.mu,
        ProliferationKind::AcidityDependent => {
            let h = h.unwrap_or(0.0);
            let excess = if cfg.acidity_inhibits_proliferation { 1.0 - h } else { h - 1.0 };
            cfg.mu * excess.max(0.0)
        }
    }
}

pub fn reaction_terms(cell: CellState, s: ReceptorState, cfg: &ModelConfig) -> Reactions {
    let CellState { m, p, v, h } = cell;
    let (lambda, gamma) = transition_rates(s, cfg);
    let switch = lambda * p - gamma * m;
    let mu_eff = proliferation_rate(v, h, cfg);
    let cells = m + p;

    if cfg.model_family == ModelFamily::SimplifiedAnalysis {
        return Reactions {
            m: switch,
            p: mu_eff * p * (1.0 - cells - cfg.eta1 * v) - switch,
            v: -cfg.alpha_s * m * v - cfg.beta_s * p * v + cfg.mu_v * v * (1.0 - v),
            h: None,
        };
    }

    let room = 1.0 - cells - v;
    let growth = match cfg.proliferation_kind {
        ProliferationKind::Anoikis => mu_eff * p * v * room,
        _ => mu_eff * p * room,
    };
    let remodel_source = match cfg.remodeling_kind {
        RemodelingKind::TissueDriven => v,
        RemodelingKind::CellDriven => m,
    };
    match (cfg.has_acidity(), h) {
        (true, Some(h)) => Reactions {
            m: switch,
            p: growth - switch,
            v: -cfg.delta * h * v + cfg.mu_v * remodel_source * room,
            h: Some(cfg.alpha_h * cells - cfg.beta_h * h),
        },
        _ => Reactions {
            m: switch,
            p: growth - switch,
            v: -cfg.delta * cells * v + cfg.mu_v * remodel_source * room,
            h: None,
        },
    }
}

/// Receptor equilibrium evaluated on the nonnegative part of the densities.
#[inline]
pub(crate) fn cell_receptors(cell: CellState, k_d: f64) -> ReceptorState {
    let c = cell.nonneg();
    equilibrium(c.m, c.p, c.v, k_d)
}

/// Reaction rates at one cell, receptor state taken at equilibrium.
pub fn cell_reactions(cell: CellState, cfg: &ModelConfig) -> Reactions {
    reaction_terms(cell, cell_receptors(cell, cfg.k_d), cfg)
}

/// pH from the nondimensional acidity, `-log10(h * 10^-h_T_exponent)`.
pub fn ph_level(h: f64, h_t_exponent: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("pH needs h > 0, got {h}")));
    }
    Ok(h_t_exponent - h.log10())
}

/// Ratio `c2 mu A^2 / (4 gamma C2)` of the repellent sensitivity to the
/// largest value admitted by the global existence condition for the
/// simplified system. Below one means the condition holds.
pub fn wellposedness_margin(cfg: &ModelConfig, state: &SimState) -> Result<f64> {
    if cfg.model_family != ModelFamily::SimplifiedAnalysis || cfg.rate_kind != RateKind::Constant {
        return Err(Error::WrongVariant(
            "well-posedness margin needs the simplified system with constant rates".into(),
        ));
    }
    if cfg.c2 == 0.0 {
        return Ok(0.0);
    }
    let a = p_bound(state.p.stats().max, cfg);
    let c2_lower = state
        .m
        .values()
        .iter()
        .zip(state.p.values())
        .zip(state.v.values())
        .map(|((&m, &p), &v)| diffusion_coeff(m, p, v, cfg))
        .fold(f64::INFINITY, f64::min);
    Ok(cfg.c2 * cfg.mu * a * a / (4.0 * cfg.gamma0 * c2_lower))
}

/// `A = max{p_max, 1 - lambda/mu, gamma/mu}` from the a-priori estimates.
pub(crate) fn p_bound(p_max: f64, cfg: &ModelConfig) -> f64 {
    p_max.max(1.0 - cfg.lambda0 / cfg.mu).max(cfg.gamma0 / cfg.mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid2D, ScalarField};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn equilibrium_examples() {
        let s = receptor_equilibrium(0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!((s.y, s.zeta), (0.0, 0.0));
        let s = receptor_equilibrium(0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!((s.y, s.zeta), (0.5, 0.0));
        let s = receptor_equilibrium(0.5, 0.5, 1.0, 1.0).unwrap();
        assert!(close(s.y, 1.0 / 3.0, 1e-15) && close(s.zeta, 1.0 / 3.0, 1e-15));
        assert!(receptor_equilibrium(-0.1, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn ode_rhs_examples() {
        let s = receptor_equilibrium(0.3, 0.2, 0.7, 1.0).unwrap();
        let (dy, dz) = receptor_ode_rhs(s, 0.3, 0.2, 0.7, 1.0, 1.0);
        assert!(dy.abs() < 1e-14 && dz.abs() < 1e-14);
        let zero = ReceptorState { y: 0.0, zeta: 0.0 };
        assert_eq!(receptor_ode_rhs(zero, 0.5, 0.5, 1.0, 1.0, 1.0), (1.0, 1.0));
        let sat = ReceptorState { y: 1.0, zeta: 0.0 };
        assert_eq!(receptor_ode_rhs(sat, 0.0, 0.0, 0.37, 1.0, 2.0), (-2.0, 0.0));
    }

    #[test]
    fn diffusion_examples() {
        let mut cfg = ModelConfig::default();
        assert_eq!(diffusion_coeff(0.0, 0.0, 0.0, &cfg), 0.001);
        assert!(close(diffusion_coeff(1.0, 1.0, 1.0, &cfg), 0.001 * 4.0 / 3.0, 1e-18));
        cfg.denominator_form = DenominatorForm::AppendixB;
        assert!(close(diffusion_coeff(1.0, 1.0, 1.0, &cfg), 0.001 * 4.0 / 3.0, 1e-18));
        assert!(close(diffusion_coeff(2.0, 0.0, 1.0, &cfg), 0.001 * 3.0 / 3.0, 1e-18));
        cfg.diffusion_kind = DiffusionKind::Degenerate;
        assert_eq!(diffusion_coeff(0.0, 0.0, 0.0, &cfg), 0.0);
        cfg.diffusion_kind = DiffusionKind::Constant;
        assert_eq!(diffusion_coeff(5.0, 1.0, 0.2, &cfg), 0.001);
    }

    #[test]
    fn sensitivity_examples() {
        let mut cfg = ModelConfig::default();
        assert_eq!(taxis_sensitivities(0.0, 0.0, 0.0, &cfg), (0.4, 0.1));
        cfg.sensitivity_kind = SensitivityKind::EquilibriumValues;
        assert_eq!(taxis_sensitivities(0.0, 0.0, 1.0, &cfg), (0.5, 0.0));
        cfg.sensitivity_kind = SensitivityKind::SimplifiedRational;
        cfg.c1 = 1.0;
        cfg.c2 = 0.05;
        assert_eq!(taxis_sensitivities(0.0, 0.0, 1.0, &cfg), (0.5, 0.05));
    }

    #[test]
    fn constant_rates() {
        let cfg = ModelConfig::default();
        let s = ReceptorState { y: 0.3, zeta: 0.1 };
        assert_eq!(transition_rates(s, &cfg), (0.01, 0.002));
    }

    #[test]
    fn dynamic_rates_vanish_without_contacts() {
        let cfg = ModelConfig { rate_kind: RateKind::Dynamic, gamma0: 0.1, ..Default::default() };
        let (lambda, gamma) = transition_rates(ReceptorState { y: 0.0, zeta: 0.0 }, &cfg);
        assert!(gamma > 0.0 && gamma < 1e-10);
        // mx = max{0 - 0, 0 - 0.6} = 0, so the logistic factor is 2/(1+1).
        assert!(close(lambda, gamma, 1e-25));
    }

    #[test]
    fn dynamic_rates_reference_point() {
        let cfg = ModelConfig { rate_kind: RateKind::Dynamic, gamma0: 0.1, ..Default::default() };
        let (lambda, gamma) = transition_rates(ReceptorState { y: 0.5, zeta: 0.2 }, &cfg);
        // 0.1 * 4 * 0.5 * e^-1 plus a ~1.8e-11 Gaussian tail
        let expected_gamma = 0.2 * (-1.0f64).exp();
        assert!(close(gamma, expected_gamma, 1e-10), "{gamma}");
        assert!(close(gamma, 0.0735759, 5e-8));
        assert!(close(lambda, 2.0 * gamma / (1.0 + 0.1f64.exp()), 1e-16));
        assert!(close(lambda, 0.0699002, 1e-7), "{lambda}");
    }

    #[test]
    fn gamma_function() {
        assert_eq!(gamma_fn(2.0), 1.0);
        assert_eq!(gamma_fn(5.0), 24.0);
        assert!(close(gamma_fn(2.5), 1.329_340_388_179_137, 1e-12));
    }

    #[test]
    fn reactions() {
        let cfg = ModelConfig { lambda0: 0.0, gamma0: 0.0, ..Default::default() };
        let r = cell_reactions(CellState::new(0.0, 0.0, 0.0), &ModelConfig::default());
        assert_eq!((r.m, r.p, r.v), (0.0, 0.0, 0.0));
        let r = cell_reactions(CellState::new(0.0, 0.5, 0.5), &cfg);
        assert_eq!(r.p, 0.0);
        assert!(close(r.v, -0.075, 1e-16));

        let acid = ModelConfig {
            repellent_target: RepellentTarget::Acidity,
            proliferation_kind: ProliferationKind::AcidityDependent,
            ..Default::default()
        };
        let r = cell_reactions(CellState::with_acidity(0.0, 0.0, 0.3, 2.0), &acid);
        assert!(close(r.h.unwrap(), -0.1, 1e-16));
    }

    #[test]
    fn variant_reactions() {
        let base = ModelConfig { lambda0: 0.0, gamma0: 0.0, ..Default::default() };
        let cell = CellState::new(0.2, 0.3, 0.1);
        let anoikis = ModelConfig { proliferation_kind: ProliferationKind::Anoikis, ..base.clone() };
        let r = cell_reactions(cell, &anoikis);
        assert!(close(r.p, 0.1 * 0.3 * 0.1 * 0.4, 1e-16));
        let remodel = ModelConfig { remodeling_kind: RemodelingKind::CellDriven, mu_v: 0.5, ..base.clone() };
        let r = cell_reactions(cell, &remodel);
        assert!(close(r.v, -0.3 * 0.5 * 0.1 + 0.5 * 0.2 * 0.4, 1e-16));
        let simple = ModelConfig {
            model_family: ModelFamily::SimplifiedAnalysis,
            eta1: 2.0,
            alpha_s: 0.4,
            beta_s: 0.1,
            ..base
        };
        let r = cell_reactions(cell, &simple);
        assert!(close(r.p, 0.1 * 0.3 * (1.0 - 0.5 - 0.2), 1e-16));
        assert!(close(r.v, -0.4 * 0.02 - 0.1 * 0.03 + 0.15 * 0.1 * 0.9, 1e-16));
    }

    #[test]
    fn proliferation_examples() {
        let mut cfg = ModelConfig {
            repellent_target: RepellentTarget::Acidity,
            proliferation_kind: ProliferationKind::AcidityDependent,
            ..Default::default()
        };
        assert_eq!(proliferation_rate(0.5, Some(1.0), &cfg), 0.0);
        assert!(close(proliferation_rate(0.5, Some(3.0), &cfg), 0.2, 1e-16));
        cfg.acidity_inhibits_proliferation = true;
        assert!(close(proliferation_rate(0.5, Some(0.5), &cfg), 0.05, 1e-16));
        assert_eq!(proliferation_rate(0.5, None, &ModelConfig::default()), 0.1);
    }

    #[test]
    fn ph_examples() {
        assert_eq!(ph_level(1.0, 6.4).unwrap(), 6.4);
        assert!(close(ph_level(0.2, 6.4).unwrap(), 7.09897, 1e-5));
        assert!(close(ph_level(10.0, 6.4).unwrap(), 5.4, 1e-14));
        assert!(ph_level(0.0, 6.4).is_err());
        assert!(ph_level(-1.0, 6.4).is_err());
    }

    fn uniform_state(p: f64) -> SimState {
        let g = Grid2D::square(4).unwrap();
        SimState::new(
            ScalarField::constant(g, 0.1),
            ScalarField::constant(g, p),
            ScalarField::constant(g, 0.5),
            None,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn wellposedness() {
        let mut cfg = ModelConfig {
            model_family: ModelFamily::SimplifiedAnalysis,
            sensitivity_kind: SensitivityKind::SimplifiedRational,
            diffusion_kind: DiffusionKind::Constant,
            c2: 0.0,
            ..Default::default()
        };
        let state = uniform_state(1.0);
        assert_eq!(wellposedness_margin(&cfg, &state).unwrap(), 0.0);
        cfg.c2 = 4.0 * 0.002 * 0.001 / 0.1;
        assert!(close(wellposedness_margin(&cfg, &state).unwrap(), 1.0, 1e-12));
        cfg.c2 *= 0.5;
        assert!(close(wellposedness_margin(&cfg, &state).unwrap(), 0.5, 1e-12));
        assert!(wellposedness_margin(&ModelConfig::default(), &state).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        let bad = ModelConfig { k_d: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ModelConfig { proliferation_kind: ProliferationKind::AcidityDependent, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ModelConfig { mu_v: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn equilibrium_occupancy_bounded(m in 0.0f64..5.0, p in 0.0f64..5.0, v in 0.0f64..5.0, k in 0.01f64..5.0) {
            let s = receptor_equilibrium(m, p, v, k).unwrap();
            prop_assert!(s.y >= 0.0 && s.zeta >= 0.0);
            let total = (m + p + v) / (k + m + p + v);
            prop_assert!((s.y + s.zeta - total).abs() < 1e-14);
            prop_assert!(s.y + s.zeta <= 1.0);
        }

        #[test]
        fn diffusion_nonnegative(m in 0.0f64..3.0, p in 0.0f64..3.0, v in 0.0f64..3.0) {
            for kind in [DiffusionKind::NonDegenerate, DiffusionKind::Degenerate, DiffusionKind::Constant] {
                for form in [DenominatorForm::Section2, DenominatorForm::AppendixB] {
                    let cfg = ModelConfig { diffusion_kind: kind, denominator_form: form, ..Default::default() };
                    prop_assert!(diffusion_coeff(m, p, v, &cfg) >= 0.0);
                }
            }
            let degen = ModelConfig { diffusion_kind: DiffusionKind::Degenerate, ..Default::default() };
            prop_assert_eq!(diffusion_coeff(m, 0.0, 0.0, &degen), 0.0);
            prop_assert_eq!(diffusion_coeff(0.0, p, 0.0, &degen), 0.0);
            prop_assert_eq!(diffusion_coeff(0.0, 0.0, v, &degen), 0.0);
        }

        #[test]
        fn switching_conserves_cells(m in 0.0f64..2.0, p in 0.0f64..2.0, v in 0.0f64..2.0, dynamic: bool) {
            let cfg = ModelConfig {
                mu: 0.0,
                rate_kind: if dynamic { RateKind::Dynamic } else { RateKind::Constant },
                ..Default::default()
            };
            let r = cell_reactions(CellState::new(m, p, v), &cfg);
            prop_assert_eq!(r.m + r.p, 0.0);
        }

        #[test]
        fn rates_nonnegative(y in 0.0f64..1.0, frac in 0.0f64..1.0) {
            let zeta = (1.0 - y) * frac;
            let cfg = ModelConfig { rate_kind: RateKind::Dynamic, gamma0: 0.1, ..Default::default() };
            let (lambda, gamma) = transition_rates(ReceptorState { y, zeta }, &cfg);
            prop_assert!(lambda >= 0.0 && gamma >= 0.0);
        }
    }
}
