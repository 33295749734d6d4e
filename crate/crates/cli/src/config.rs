//! Experiment configuration: command-line flags over a key=value file over
//! per-subcommand defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rangewalk::ConductanceMode;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Block constants tau, delta, rho, nu, eta and kappa1, kappa2 (d >= 5)
    Constants,
    /// Exact return-probability series and spectral-dimension fits
    Heatkernel,
    /// Mean squared displacement, graph distance and walk-dimension fit
    Displacement,
    /// Exact expected exit times from graph balls
    ExitTimes,
    /// Ball volumes and ball-complement resistances
    Volume,
    /// Kolmogorov-Smirnov tests against the scaling limits (d >= 5)
    ScalingTest,
    /// Growth of one-sided cut-times
    Cuttimes,
    /// Window coverage and cut-time growth in d = 4
    D4Diagnostics,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Constants => "constants",
            Experiment::Heatkernel => "heatkernel",
            Experiment::Displacement => "displacement",
            Experiment::ExitTimes => "exit-times",
            Experiment::Volume => "volume",
            Experiment::ScalingTest => "scaling-test",
            Experiment::Cuttimes => "cuttimes",
            Experiment::D4Diagnostics => "d4-diagnostics",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Uniform,
    Weighted,
}

impl From<ModeArg> for ConductanceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Uniform => ConductanceMode::Unit,
            ModeArg::Weighted => ConductanceMode::CrossingCount,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Lattice dimension
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of environments
    #[arg(long)]
    pub envs: Option<usize>,
    /// Path length (per side for two-sided environments)
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Walk horizon, ball radius or window scale, depending on the subcommand
    #[arg(long)]
    pub nmax: Option<u64>,
    /// Walkers per environment
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on it)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory [env: RANGEWALK_OUT]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Conductances: uniform (simple walk) or weighted (crossing counts)
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Comma-separated window constants
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    /// Environments used to estimate kappa1, kappa2 in scaling-test
    #[arg(long)]
    pub kappa_envs: Option<usize>,
    /// Plain key=value file with defaults for any of the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Record wall-clock time in the summary (makes it non-reproducible)
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug)]
pub enum ConfigError {
    Invalid(String),
    Io(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Invalid(m) => write!(f, "{m}"),
            ConfigError::Io(m) => write!(f, "{m}"),
        }
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    pub envs: usize,
    pub horizon: u64,
    pub nmax: u64,
    pub trials: usize,
    pub seed: u64,
    pub mode: ConductanceMode,
    pub lambda_grid: Vec<f64>,
    pub kappa_envs: usize,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub timing: bool,
}

struct Defaults {
    dim: usize,
    envs: usize,
    horizon: u64,
    nmax: u64,
    trials: usize,
}

fn defaults(e: Experiment) -> Defaults {
    let d = |dim, envs, horizon, nmax, trials| Defaults {
        dim,
        envs,
        horizon,
        nmax,
        trials,
    };
    match e {
        Experiment::Constants => d(5, 200, 2000, 0, 1),
        Experiment::Heatkernel => d(5, 50, 0, 1 << 13, 1),
        Experiment::Displacement => d(5, 50, 0, 1 << 12, 20),
        Experiment::ExitTimes => d(4, 50, 0, 128, 1),
        Experiment::Volume => d(4, 50, 0, 1024, 1),
        Experiment::ScalingTest => d(5, 500, 2000, 10_000, 1),
        Experiment::Cuttimes => d(4, 20, 1 << 18, 0, 1),
        Experiment::D4Diagnostics => d(4, 200, 1 << 18, 1000, 1),
    }
}

fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ConfigError::Invalid(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        let k = k.trim().replace('_', "-");
        const KEYS: [&str; 11] = [
            "dim",
            "envs",
            "horizon",
            "nmax",
            "trials",
            "seed",
            "workers",
            "out",
            "mode",
            "lambda-grid",
            "kappa-envs",
        ];
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::Invalid(format!(
                "{}: unknown key '{k}'",
                path.display()
            )));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn from_file<T: std::str::FromStr>(
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, ConfigError> {
    match file.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::Invalid(format!("config key '{key}': bad value '{v}'"))),
    }
}

impl ExperimentConfig {
    pub fn resolve(experiment: Experiment, flags: &Flags) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(p) => parse_file(p)?,
            None => BTreeMap::new(),
        };
        let def = defaults(experiment);
        let mode = match flags.mode {
            Some(m) => m.into(),
            None => match file.get("mode").map(String::as_str) {
                None => ConductanceMode::Unit,
                Some("uniform") => ConductanceMode::Unit,
                Some("weighted") => ConductanceMode::CrossingCount,
                Some(other) => {
                    return Err(ConfigError::Invalid(format!(
                        "config key 'mode': bad value '{other}'"
                    )))
                }
            },
        };
        let lambda_grid = match &flags.lambda_grid {
            Some(g) => g.clone(),
            None => match file.get("lambda-grid") {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| {
                        ConfigError::Invalid(format!("config key 'lambda-grid': bad value '{s}'"))
                    })?,
                None => rangewalk::estimators::d4::LAMBDA_GRID.to_vec(),
            },
        };
        let out = flags
            .out
            .clone()
            .or(from_file::<PathBuf>(&file, "out")?)
            .or_else(|| std::env::var_os("RANGEWALK_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("rangewalk-out"));
        let workers = flags
            .workers
            .or(from_file(&file, "workers")?)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let cfg = ExperimentConfig {
            experiment,
            dim: flags.dim.or(from_file(&file, "dim")?).unwrap_or(def.dim),
            envs: flags.envs.or(from_file(&file, "envs")?).unwrap_or(def.envs),
            horizon: flags
                .horizon
                .or(from_file(&file, "horizon")?)
                .unwrap_or(def.horizon),
            nmax: flags.nmax.or(from_file(&file, "nmax")?).unwrap_or(def.nmax),
            trials: flags
                .trials
                .or(from_file(&file, "trials")?)
                .unwrap_or(def.trials),
            seed: flags.seed.or(from_file(&file, "seed")?).unwrap_or(1),
            mode,
            lambda_grid,
            kappa_envs: flags
                .kappa_envs
                .or(from_file(&file, "kappa-envs")?)
                .unwrap_or(200),
            workers,
            out,
            timing: flags.timing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.dim == 0 {
            return bad("dimension must be at least 1".into());
        }
        if self.envs == 0 || self.trials == 0 || self.workers == 0 || self.kappa_envs == 0 {
            return bad("envs, trials, workers and kappa-envs must be at least 1".into());
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|&l| !(l >= 1.0)) {
            return bad("lambda grid values must be at least 1".into());
        }
        match self.experiment {
            Experiment::Constants | Experiment::ScalingTest if self.dim < 5 => {
                return bad("block constants require d ≥ 5".into());
            }
            Experiment::D4Diagnostics if self.dim != 4 => {
                return bad("d4 diagnostics require d = 4".into());
            }
            // one-sided cut-times bound the exact region of every environment
            _ if self.dim < 3 => {
                return bad(format!("{} requires d ≥ 3", self.experiment.name()));
            }
            _ => {}
        }
        let needs = |name: &str, v: u64, min: u64| {
            if v < min {
                Err(ConfigError::Invalid(format!(
                    "{name} must be at least {min}"
                )))
            } else {
                Ok(())
            }
        };
        match self.experiment {
            Experiment::Constants => needs("horizon", self.horizon, 10)?,
            Experiment::Heatkernel => needs("nmax", self.nmax, 128)?,
            Experiment::Displacement => needs("nmax", self.nmax, 32)?,
            Experiment::ExitTimes | Experiment::Volume => needs("nmax", self.nmax, 16)?,
            Experiment::ScalingTest => {
                needs("horizon", self.horizon, 10)?;
                needs("nmax", self.nmax, 1)?;
            }
            Experiment::Cuttimes => needs("horizon", self.horizon, 64)?,
            Experiment::D4Diagnostics => {
                needs("nmax", self.nmax, 8)?;
                needs("horizon", self.horizon, 64)?;
            }
        }
        if self.nmax > u32::MAX as u64 / 4 {
            return bad("nmax too large".into());
        }
        Ok(())
    }
}
