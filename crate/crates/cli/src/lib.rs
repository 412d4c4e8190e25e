//! Command-line front end for the invasion simulator.

use std::path::PathBuf;

use clap::Parser;
use invasion::driver::{preset, Experiment, InitialCondition, SimulationConfig};
use invasion::kinetics::DenominatorForm;
use invasion::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Denominator {
    Section2,
    Appendixb,
}

#[derive(Debug, Parser)]
#[command(name = "invasion", version, about = "Simulate tumor invasion with double taxis and phenotype switching")]
pub struct Cli {
    /// Experiment preset: exp1..exp6 or custom
    #[arg(long, default_value = "exp1")]
    pub experiment: Experiment,
    /// Initial condition: stripes or random
    #[arg(long, default_value = "stripes")]
    pub ic: InitialCondition,
    /// Cells per side
    #[arg(long)]
    pub grid: Option<usize>,
    /// Final time
    #[arg(long)]
    pub tend: Option<f64>,
    /// CFL number for adaptive steps
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Upper bound on the adaptive step
    #[arg(long = "dt-max")]
    pub dt_max: Option<f64>,
    /// Fixed step size, overrides adaptive selection
    #[arg(long)]
    pub dt: Option<f64>,
    /// Seed for the random ECM
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated snapshot times
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// Model parameter override, key=value (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Sensitivity denominator convention
    #[arg(long, value_enum)]
    pub denominator: Option<Denominator>,
}

/// Outcome of argument parsing.
#[derive(Debug)]
pub enum Parsed {
    Run { config: Box<SimulationConfig>, warnings: Vec<String> },
    /// `--help` or `--version`; the text goes to stdout.
    Info(String),
}

/// Parses `argv` (including the program name) into a resolved configuration.
pub fn parse_cli<I, T>(argv: I) -> Result<Parsed>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(Parsed::Info(e.to_string())),
                _ => Err(Error::Config(e.to_string().trim_start_matches("error: ").trim_end().to_string())),
            };
        }
    };
    let mut warnings = Vec::new();
    let config = resolve(cli, &mut warnings)?;
    Ok(Parsed::Run { config: Box::new(config), warnings })
}

fn resolve(cli: Cli, warnings: &mut Vec<String>) -> Result<SimulationConfig> {
    let mut config = preset(cli.experiment);
    config.ic = cli.ic;
    if let Some(n) = cli.grid {
        config.grid_n = n;
    }
    if let Some(t) = cli.tend {
        config.t_end = t;
        config.snapshot_times = SimulationConfig::default_snapshots(t);
    }
    if let Some(times) = cli.snapshots {
        config.snapshot_times = times;
    }
    if let Some(cfl) = cli.cfl {
        config.controls.cfl = cfl;
    }
    if let Some(d) = cli.dt_max {
        config.controls.dt_max = d;
    }
    if let Some(dt) = cli.dt {
        if cli.cfl.is_some() {
            warnings.push(format!("--dt {dt} overrides --cfl"));
        }
        config.controls.dt_fixed = Some(dt);
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(d) = cli.denominator {
        config.model.denominator_form = match d {
            Denominator::Section2 => DenominatorForm::Section2,
            Denominator::Appendixb => DenominatorForm::AppendixB,
        };
    }
    for assignment in &cli.set {
        config.apply_assignment(assignment)?;
    }
    config.validate()?;
    Ok(config)
}
