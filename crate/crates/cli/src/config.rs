//! Invocation settings: flags layered over an optional `key = value` file.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use workday_core::{MasterSeed, ModelParams, SweepSpec};

use crate::CliError;

/// Settings shared by `run`, `sweep` and `preset`. Every field is optional so
/// that flags can be layered over a config file and a base spec.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct Settings {
    /// Group size N.
    #[arg(long)]
    pub n: Option<u32>,
    /// Extrovert fraction(s) in [0, 1]; comma-separated for `sweep`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub eta: Option<Vec<f64>>,
    /// Mean contact attempts per instigation; comma-separated for `sweep`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub q: Option<Vec<f64>>,
    /// Maximum conversation length in minutes; comma-separated for `sweep`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub d: Option<Vec<u32>>,
    /// Workday length in minutes (also the motivation cap).
    #[arg(long)]
    pub t: Option<u32>,
    /// Extrovert threshold divisor.
    #[arg(long = "tau-e")]
    pub tau_e: Option<f64>,
    /// Introvert threshold divisor.
    #[arg(long = "tau-i")]
    pub tau_i: Option<f64>,
    /// Runs per grid point.
    #[arg(long)]
    pub runs: Option<u32>,
    /// Master seed, decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_seed)]
    pub seed: Option<MasterSeed>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write ensemble-mean time series.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub series: Option<bool>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Prefix for output file names.
    #[arg(long)]
    pub name: Option<String>,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_seed(s: &str) -> Result<MasterSeed, String> {
    s.parse().map_err(|e: workday_core::StochasticsError| e.to_string())
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| usage(format!("config key `{key}`: cannot parse `{v}`")))
        })
        .collect()
}

fn one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| usage(format!("config key `{key}`: cannot parse `{value}`")))
}

impl Settings {
    /// Parses a settings file. Blank lines and `#` comments are ignored; keys
    /// match the long flag names (`tau-e` and `tau_e` are both accepted).
    pub fn parse_file(text: &str) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected `key = value`", i + 1)))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            match key.as_str() {
                "n" => s.n = Some(one(&key, value)?),
                "eta" => s.eta = Some(list(&key, value)?),
                "q" => s.q = Some(list(&key, value)?),
                "d" => s.d = Some(list(&key, value)?),
                "t" => s.t = Some(one(&key, value)?),
                "tau_e" => s.tau_e = Some(one(&key, value)?),
                "tau_i" => s.tau_i = Some(one(&key, value)?),
                "runs" => s.runs = Some(one(&key, value)?),
                "seed" => s.seed = Some(parse_seed(value).map_err(usage)?),
                "out" => s.out = Some(PathBuf::from(value)),
                "series" => s.series = Some(one(&key, value)?),
                "workers" => s.workers = Some(one(&key, value)?),
                "name" => s.name = Some(value.to_string()),
                other => return Err(usage(format!("config line {}: unknown key `{other}`", i + 1))),
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
        Settings::parse_file(&text)
    }

    /// `self` wins wherever both are set.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            n: self.n.or(base.n),
            eta: self.eta.or(base.eta),
            q: self.q.or(base.q),
            d: self.d.or(base.d),
            t: self.t.or(base.t),
            tau_e: self.tau_e.or(base.tau_e),
            tau_i: self.tau_i.or(base.tau_i),
            runs: self.runs.or(base.runs),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            series: self.series.or(base.series),
            workers: self.workers.or(base.workers),
            name: self.name.or(base.name),
            config: self.config.or(base.config),
        }
    }

    /// Flags layered over the `--config` file, if any.
    pub fn resolve(self) -> Result<Settings, CliError> {
        match &self.config {
            Some(path) => {
                let file = Settings::load(path)?;
                Ok(self.over(file))
            }
            None => Ok(self),
        }
    }

    /// Applies the settings to `spec`, checking ranges and naming the
    /// offending flag on failure.
    pub fn apply(&self, spec: &mut SweepSpec) -> Result<(), CliError> {
        if let Some(eta) = &self.eta {
            if let Some(bad) = eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
                return Err(usage(format!("--eta: {bad} is outside [0, 1]")));
            }
            spec.eta_grid = eta.clone();
        }
        if let Some(q) = &self.q {
            if let Some(bad) = q.iter().find(|q| !q.is_finite() || **q < 0.0) {
                return Err(usage(format!("--q: {bad} must be a finite non-negative number")));
            }
            spec.q_grid = q.clone();
        }
        if let Some(d) = &self.d {
            if d.contains(&0) {
                return Err(usage("--d: conversation length must be at least 1"));
            }
            spec.d_grid = Some(d.clone());
        }
        if let Some(n) = self.n {
            if n == 0 {
                return Err(usage("--n: group size must be positive"));
            }
            spec.base.n_agents = n;
        }
        if let Some(t) = self.t {
            if t == 0 {
                return Err(usage("--t: workday length must be positive"));
            }
            spec.base = spec.base.with_horizon(t);
        }
        for (flag, value) in [("--tau-e", self.tau_e), ("--tau-i", self.tau_i)] {
            if let Some(v) = value {
                if !v.is_finite() || v <= 0.0 {
                    return Err(usage(format!("{flag}: {v} must be a finite positive number")));
                }
            }
        }
        if let Some(v) = self.tau_e {
            spec.base.tau_extrovert = v;
        }
        if let Some(v) = self.tau_i {
            spec.base.tau_introvert = v;
        }
        if spec.base.tau_introvert < spec.base.tau_extrovert {
            return Err(usage(format!(
                "--tau-i: {} is below --tau-e {}",
                spec.base.tau_introvert, spec.base.tau_extrovert
            )));
        }
        if let Some(r) = self.runs {
            if r == 0 {
                return Err(usage("--runs: must be at least 1"));
            }
            spec.runs_per_point = r;
        }
        if let Some(seed) = self.seed {
            spec.master_seed = seed;
        }
        if let Some(series) = self.series {
            spec.retain_series = series;
        }
        Ok(())
    }
}

/// Serializable copy of [`ModelParams`] for the manifest.
#[derive(Clone, Debug, Serialize)]
pub struct BaseParams {
    pub n_agents: u32,
    pub horizon: u32,
    pub max_duration: u32,
    pub tau_extrovert: f64,
    pub tau_introvert: f64,
    pub motivation_cap: u32,
}

impl From<&ModelParams> for BaseParams {
    fn from(p: &ModelParams) -> Self {
        BaseParams {
            n_agents: p.n_agents,
            horizon: p.horizon,
            max_duration: p.max_duration,
            tau_extrovert: p.tau_extrovert,
            tau_introvert: p.tau_introvert,
            motivation_cap: p.motivation_cap,
        }
    }
}

/// The configuration actually used, echoed into the manifest.
#[derive(Clone, Debug, Serialize)]
pub struct Effective {
    pub command: String,
    pub preset: Option<String>,
    pub name: String,
    pub base: BaseParams,
    pub eta_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub d_grid: Vec<u32>,
    pub runs_per_point: u32,
    pub master_seed: u64,
    pub retain_series: bool,
    pub trace_agents: bool,
    pub workers: usize,
    pub out: PathBuf,
    pub config_file: Option<PathBuf>,
}

impl Effective {
    pub fn new(command: &str, preset: Option<String>, name: String, spec: &SweepSpec, s: &Settings) -> Self {
        Effective {
            command: command.to_string(),
            preset,
            name,
            base: BaseParams::from(&spec.base),
            eta_grid: spec.eta_grid.clone(),
            q_grid: spec.q_grid.clone(),
            d_grid: spec.d_grid.clone().unwrap_or_else(|| vec![spec.base.max_duration]),
            runs_per_point: spec.runs_per_point,
            master_seed: spec.master_seed.0,
            retain_series: spec.retain_series,
            trace_agents: spec.trace_agents,
            workers: s.workers.unwrap_or(0),
            out: s.out.clone().unwrap_or_else(|| PathBuf::from(".")),
            config_file: s.config.clone(),
        }
    }
}
