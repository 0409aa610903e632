//! Flat key-value config files and command-line overrides.
//!
//! Precedence is flags, then file, then built-in defaults. Keys are the
//! field names of [`SimConfig`] plus the sweep keys `alpha_values`,
//! `beta_values`, `runs_per_cell`, and `base_seed`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::InfluenceMode;
use crate::error::{Error, Result};
use crate::experiment::{SimConfig, SweepConfig};

pub const KEYS: [&str; 15] = [
    "n_agents",
    "n_edges",
    "steps",
    "alpha",
    "beta",
    "sigma",
    "influence_mode",
    "init_sigma",
    "sample_interval",
    "bin_count",
    "seed",
    "alpha_values",
    "beta_values",
    "runs_per_cell",
    "base_seed",
];

/// Contents of a config file. Absent keys fall back to defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_agents: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub influence_mode: Option<InfluenceMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_interval: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs_per_cell: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
}

/// Values given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub sigma: Option<f64>,
    pub steps: Option<u64>,
    pub influence_mode: Option<InfluenceMode>,
}

fn field<T: DeserializeOwned>(key: &str, value: &toml::Value) -> Result<T> {
    value
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| Error::config(key, e.message().trim().to_string()))
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.to_string().trim().to_string()))?;
        let mut out = FileConfig::default();
        for (key, value) in &table {
            if let toml::Value::Table(_) = value {
                return Err(Error::config(key.as_str(), "nested tables are not allowed; keys are flat"));
            }
            match key.as_str() {
                "n_agents" => out.n_agents = Some(field(key, value)?),
                "n_edges" => out.n_edges = Some(field(key, value)?),
                "steps" => out.steps = Some(field(key, value)?),
                "alpha" => out.alpha = Some(number(key, value)?),
                "beta" => out.beta = Some(number(key, value)?),
                "sigma" => out.sigma = Some(number(key, value)?),
                "influence_mode" => {
                    let s: String = field(key, value)?;
                    out.influence_mode = Some(s.parse().map_err(|e: String| Error::config(key.as_str(), e))?);
                }
                "init_sigma" => out.init_sigma = Some(number(key, value)?),
                "sample_interval" => out.sample_interval = Some(field(key, value)?),
                "bin_count" => out.bin_count = Some(field(key, value)?),
                "seed" => out.seed = Some(field(key, value)?),
                "alpha_values" => out.alpha_values = Some(numbers(key, value)?),
                "beta_values" => out.beta_values = Some(numbers(key, value)?),
                "runs_per_cell" => out.runs_per_cell = Some(field(key, value)?),
                "base_seed" => out.base_seed = Some(field(key, value)?),
                _ => {
                    return Err(Error::config(
                        key.as_str(),
                        format!("unknown key; expected one of {}", KEYS.join(", ")),
                    ))
                }
            }
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Fails only for seeds above `i64::MAX`, which TOML cannot represent.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("seed", e.to_string()))
    }

    pub fn from_sim(config: &SimConfig) -> Self {
        FileConfig {
            n_agents: Some(config.n_agents),
            n_edges: Some(config.n_edges),
            steps: Some(config.steps),
            alpha: Some(config.alpha),
            beta: Some(config.beta),
            sigma: Some(config.sigma),
            influence_mode: Some(config.influence_mode),
            init_sigma: Some(config.init_sigma),
            sample_interval: Some(config.sample_interval),
            bin_count: Some(config.bin_count),
            seed: Some(config.seed),
            ..FileConfig::default()
        }
    }

    /// Flat form of a sweep; the template's `alpha`, `beta`, and `seed` are unused and omitted.
    pub fn from_sweep(sweep: &SweepConfig) -> Self {
        FileConfig {
            alpha: None,
            beta: None,
            seed: None,
            alpha_values: Some(sweep.alpha_values.clone()),
            beta_values: Some(sweep.beta_values.clone()),
            runs_per_cell: Some(sweep.runs_per_cell),
            base_seed: Some(sweep.base_seed),
            ..FileConfig::from_sim(&sweep.template)
        }
    }

    fn sim_base(&self) -> SimConfig {
        let d = SimConfig::default();
        SimConfig {
            n_agents: self.n_agents.unwrap_or(d.n_agents),
            n_edges: self.n_edges.unwrap_or(d.n_edges),
            steps: self.steps.unwrap_or(d.steps),
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            sigma: self.sigma.unwrap_or(d.sigma),
            influence_mode: self.influence_mode.unwrap_or(d.influence_mode),
            init_sigma: self.init_sigma.unwrap_or(d.init_sigma),
            sample_interval: self.sample_interval.unwrap_or(d.sample_interval),
            bin_count: self.bin_count.unwrap_or(d.bin_count),
            seed: self.seed.unwrap_or(d.seed),
        }
    }
}

/// TOML integers are accepted where a real is expected.
fn number(key: &str, value: &toml::Value) -> Result<f64> {
    match value {
        toml::Value::Integer(i) => Ok(*i as f64),
        other => field(key, other),
    }
}

fn numbers(key: &str, value: &toml::Value) -> Result<Vec<f64>> {
    match value {
        toml::Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, v)| number(&format!("{key}[{i}]"), v))
            .collect(),
        _ => Err(Error::config(key, "expected an array of numbers")),
    }
}

/// Seeds must fit a TOML integer so the resolved config can be written back out.
fn check_seed(key: &str, seed: u64) -> Result<()> {
    if seed > i64::MAX as u64 {
        return Err(Error::config(key, format!("{seed} exceeds {}", i64::MAX)));
    }
    Ok(())
}

fn apply_dynamics(config: &mut SimConfig, flags: &Overrides) {
    if let Some(v) = flags.sigma {
        config.sigma = v;
    }
    if let Some(v) = flags.steps {
        config.steps = v;
    }
    if let Some(v) = flags.influence_mode {
        config.influence_mode = v;
    }
}

/// Resolved single-run config, validated.
pub fn resolve_run(file: &FileConfig, flags: &Overrides) -> Result<SimConfig> {
    let mut config = file.sim_base();
    apply_dynamics(&mut config, flags);
    if let Some(v) = flags.alpha {
        config.alpha = v;
    }
    if let Some(v) = flags.beta {
        config.beta = v;
    }
    if let Some(v) = flags.seed {
        config.seed = v;
    }
    config.validate()?;
    check_seed("seed", config.seed)?;
    Ok(config)
}

/// Resolved sweep config, validated. `--alpha`/`--beta` pin that axis to a
/// single value and `--seed` sets the base seed.
pub fn resolve_sweep(file: &FileConfig, flags: &Overrides) -> Result<SweepConfig> {
    let d = SweepConfig::default();
    let mut template = file.sim_base();
    apply_dynamics(&mut template, flags);
    let sweep = SweepConfig {
        alpha_values: flags
            .alpha
            .map(|a| vec![a])
            .or_else(|| file.alpha_values.clone())
            .unwrap_or(d.alpha_values),
        beta_values: flags
            .beta
            .map(|b| vec![b])
            .or_else(|| file.beta_values.clone())
            .unwrap_or(d.beta_values),
        runs_per_cell: file.runs_per_cell.unwrap_or(d.runs_per_cell),
        base_seed: flags.seed.or(file.base_seed).unwrap_or(d.base_seed),
        template,
    };
    sweep.validate()?;
    check_seed("base_seed", sweep.base_seed)?;
    Ok(sweep)
}
