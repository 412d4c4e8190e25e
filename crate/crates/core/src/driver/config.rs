use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::imex::StepControls;
use crate::kinetics::{
    DiffusionKind, ModelConfig, ProliferationKind, RateKind, RemodelingKind, RepellentTarget,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
    Exp5,
    Exp6,
    Custom,
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exp1" | "1" => Experiment::Exp1,
            "exp2" | "2" => Experiment::Exp2,
            "exp3" | "3" => Experiment::Exp3,
            "exp4" | "4" => Experiment::Exp4,
            "exp5" | "5" => Experiment::Exp5,
            "exp6" | "6" => Experiment::Exp6,
            "custom" => Experiment::Custom,
            other => return Err(Error::Config(format!("unknown experiment `{other}`"))),
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Experiment::Exp1 => "exp1",
            Experiment::Exp2 => "exp2",
            Experiment::Exp3 => "exp3",
            Experiment::Exp4 => "exp4",
            Experiment::Exp5 => "exp5",
            Experiment::Exp6 => "exp6",
            Experiment::Custom => "custom",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialCondition {
    Stripes,
    Random,
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stripes" => Ok(InitialCondition::Stripes),
            "random" => Ok(InitialCondition::Random),
            other => Err(Error::Config(format!("unknown initial condition `{other}`"))),
        }
    }
}

pub const DEFAULT_SNAPSHOT_TIMES: [f64; 4] = [0.0, 3.3, 6.7, 10.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub experiment: Experiment,
    pub ic: InitialCondition,
    pub grid_n: usize,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub seed: u64,
    /// Width of the initial Gaussian tumor.
    pub ic_width: f64,
    /// Range the random ECM is rescaled to.
    pub ecm_range: (f64, f64),
    pub controls: StepControls,
    pub model: ModelConfig,
    pub out_dir: PathBuf,
    /// Parameter overrides applied on top of the preset, in application order by key.
    pub overrides: BTreeMap<String, Value>,
    /// Emit a diagnostics record every this many steps.
    pub diagnostics_every: usize,
}

/// Preset for one of the six experiments (or `custom`, which starts from
/// the constant-rate baseline).
pub fn preset(experiment: Experiment) -> SimulationConfig {
    let mut model = ModelConfig::default();
    match experiment {
        Experiment::Exp1 | Experiment::Custom => {
            model.rate_kind = RateKind::Constant;
            model.lambda0 = 0.01;
            model.gamma0 = 0.002;
        }
        _ => {
            model.rate_kind = RateKind::Dynamic;
            model.gamma0 = 0.1;
            model.b = 2.0;
            model.p_shape = 2.0;
            model.mu_y = 2.0;
            model.mu_zeta = 2.0;
            model.sigma_y = 0.5;
            model.sigma_zeta = 0.3;
            model.y_ref = 0.6;
        }
    }
    match experiment {
        Experiment::Exp3 => {
            model.repellent_target = RepellentTarget::Acidity;
            model.proliferation_kind = ProliferationKind::AcidityDependent;
            model.d_h = 0.07;
            model.alpha_h = 0.55;
            model.beta_h = 0.05;
            model.delta = 0.2;
            model.mu = 0.1;
        }
        Experiment::Exp4 => model.diffusion_kind = DiffusionKind::Degenerate,
        Experiment::Exp5 => {
            model.remodeling_kind = RemodelingKind::CellDriven;
            model.mu_v = 0.5;
        }
        Experiment::Exp6 => model.proliferation_kind = ProliferationKind::Anoikis,
        _ => {}
    }
    SimulationConfig {
        experiment,
        ic: InitialCondition::Stripes,
        grid_n: 128,
        t_end: 10.0,
        snapshot_times: DEFAULT_SNAPSHOT_TIMES.to_vec(),
        seed: 0,
        ic_width: 0.3,
        ecm_range: (0.0, 1.0),
        controls: StepControls::default(),
        model,
        out_dir: PathBuf::from("out"),
        overrides: BTreeMap::new(),
        diagnostics_every: 50,
    }
}

/// Parses an override value: number, boolean, or a bare string (enum variant).
fn parse_value(raw: &str) -> Value {
    if let Ok(x) = raw.parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(x) {
            return Value::Number(n);
        }
    }
    match raw {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(raw.to_string()),
    }
}

impl SimulationConfig {
    /// Default snapshot times truncated to `t_end`, always ending at `t_end`.
    pub fn default_snapshots(t_end: f64) -> Vec<f64> {
        let mut times: Vec<f64> = DEFAULT_SNAPSHOT_TIMES.iter().copied().filter(|&t| t < t_end).collect();
        if times.last() != Some(&t_end) {
            times.push(t_end);
        }
        times
    }

    /// Sets a model parameter by name, e.g. `mu_v=0.5` or
    /// `diffusion_kind=Degenerate`, and records it.
    pub fn apply_override(&mut self, key: &str, raw: &str) -> Result<()> {
        let mut model = serde_json::to_value(&self.model)?;
        let obj = model.as_object_mut().expect("model serializes to an object");
        if !obj.contains_key(key) {
            return Err(Error::Config(format!("unknown parameter `{key}`")));
        }
        let value = parse_value(raw);
        obj.insert(key.to_string(), value.clone());
        self.model = serde_json::from_value(model)
            .map_err(|e| Error::Config(format!("bad value `{raw}` for `{key}`: {e}")))?;
        self.overrides.insert(key.to_string(), value);
        Ok(())
    }

    /// Parses `key=value` and applies it.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{assignment}`")))?;
        self.apply_override(key.trim(), value.trim())
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 2 {
            return Err(Error::Config(format!("grid must have at least 2 cells per side, got {}", self.grid_n)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("snapshot times must be strictly increasing".into()));
        }
        if self.snapshot_times.iter().any(|&t| !(0.0..=self.t_end).contains(&t)) {
            return Err(Error::Config(format!("snapshot times must lie in [0, {}]", self.t_end)));
        }
        if self.diagnostics_every == 0 {
            return Err(Error::Config("diagnostics interval must be >= 1".into()));
        }
        if !(self.ic_width > 0.0) || !(self.ecm_range.1 >= self.ecm_range.0) {
            return Err(Error::Config("invalid initial-condition parameters".into()));
        }
        self.controls.validate()?;
        self.model.validate()
    }
}
