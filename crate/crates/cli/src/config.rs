//! Run configuration.
//!
//! A config file is flat `key = value` text; `#` starts a comment. Lists are
//! comma separated. Every key can also be given as a `--kebab-case` flag,
//! and flags override the file.
//!
//! | key                 | default                          |
//! |---------------------|----------------------------------|
//! | `profile`           | none (synthetic profiles)        |
//! | `meters`            | 1                                |
//! | `mean_wh`           | 872                              |
//! | `seed`              | 0                                |
//! | `out`               | `out`                            |
//! | `epsilon`           | 0.01,0.05,0.1,0.3,0.7,1          |
//! | `delta_reading`     | 0.01,0.02,0.05,0.1,0.25,0.5      |
//! | `delta_db`          | 1                                |
//! | `mechanism`         | laplace,gaussian,uniform,geometric |
//! | `days`              | 100                              |
//! | `nodes`             | number of meters                 |
//! | `stakes`            | 1 per node                       |
//! | `slots_per_block`   | 144 (one block per day)          |
//! | `with_ground_truth` | false                            |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dpmeter_core::eval::ExperimentConfig;
use dpmeter_core::{Mechanism, StakeTable};

use crate::CliError;

pub const KEYS: [&str; 14] = [
    "profile",
    "meters",
    "mean_wh",
    "seed",
    "out",
    "epsilon",
    "delta_reading",
    "delta_db",
    "mechanism",
    "days",
    "nodes",
    "stakes",
    "slots_per_block",
    "with_ground_truth",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profiles: Vec<PathBuf>,
    pub meters: usize,
    pub mean_wh: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub epsilons: Vec<f64>,
    pub delta_readings: Vec<f64>,
    pub delta_db: f64,
    pub mechanisms: Vec<Mechanism>,
    pub days: usize,
    pub nodes: Option<usize>,
    pub stakes: Vec<u64>,
    pub slots_per_block: usize,
    pub with_ground_truth: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let exp = ExperimentConfig::default();
        Self {
            profiles: Vec::new(),
            meters: 1,
            mean_wh: 872.0,
            seed: 0,
            out: PathBuf::from("out"),
            epsilons: exp.epsilon_grid,
            delta_readings: exp.delta_reading_grid,
            delta_db: exp.delta_db,
            mechanisms: exp.mechanisms,
            days: exp.days,
            nodes: None,
            stakes: Vec::new(),
            slots_per_block: 144,
            with_ground_truth: false,
        }
    }
}

/// Parses config-file text into raw key/value pairs.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", i + 1)));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(out)
}

pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::Usage(format!("{key}: `{s}`: {e}")))
        })
        .collect()
}

fn one<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("{key}: `{value}`: {e}")))
}

impl RunConfig {
    /// Builds a config from file values overlaid with flag values.
    pub fn resolve(file: &BTreeMap<String, String>, flags: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut merged = file.clone();
        for (k, v) in flags {
            merged.insert(k.clone(), v.clone());
        }
        let mut cfg = RunConfig::default();
        for (key, value) in &merged {
            match key.as_str() {
                "profile" => cfg.profiles = list::<PathBuf>(key, value)?,
                "meters" => cfg.meters = one(key, value)?,
                "mean_wh" => cfg.mean_wh = one(key, value)?,
                "seed" => cfg.seed = one(key, value)?,
                "out" => cfg.out = PathBuf::from(value.trim()),
                "epsilon" => cfg.epsilons = list(key, value)?,
                "delta_reading" => cfg.delta_readings = list(key, value)?,
                "delta_db" => cfg.delta_db = one(key, value)?,
                "mechanism" => cfg.mechanisms = list(key, value)?,
                "days" => cfg.days = one(key, value)?,
                "nodes" => cfg.nodes = Some(one(key, value)?),
                "stakes" => cfg.stakes = list(key, value)?,
                "slots_per_block" => cfg.slots_per_block = one(key, value)?,
                "with_ground_truth" => cfg.with_ground_truth = one(key, value)?,
                other => return Err(CliError::Usage(format!("unknown key `{other}`"))),
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        if let Some(missing) = self.profiles.iter().find(|p| !p.is_file()) {
            return Err(CliError::Usage(format!("profile {} does not exist", missing.display())));
        }
        if self.profiles.is_empty() && self.meters == 0 {
            return Err(CliError::Usage("meters must be at least 1".into()));
        }
        if self.mechanisms.is_empty() {
            return Err(CliError::Usage("mechanism list is empty".into()));
        }
        if self.slots_per_block == 0 || self.slots_per_block > 144 {
            return Err(CliError::Usage("slots_per_block must be in 1..=144".into()));
        }
        let meters = self.meter_count();
        if let Some(n) = self.nodes {
            if n < meters {
                return Err(CliError::Usage(format!(
                    "nodes ({n}) must be at least the number of meters ({meters})"
                )));
            }
        }
        if !self.stakes.is_empty() && self.stakes.len() != self.node_count() {
            return Err(CliError::Usage(format!(
                "stakes lists {} values for {} nodes",
                self.stakes.len(),
                self.node_count()
            )));
        }
        Ok(())
    }

    pub fn meter_count(&self) -> usize {
        if self.profiles.is_empty() {
            self.meters
        } else {
            self.profiles.len()
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.unwrap_or_else(|| self.meter_count())
    }

    /// Stake table over `meter_ids` followed by `node-<i>` for any extra
    /// non-metering nodes.
    pub fn stake_table(&self, meter_ids: &[String]) -> StakeTable {
        let extra = self.node_count().saturating_sub(meter_ids.len());
        let ids = meter_ids
            .iter()
            .cloned()
            .chain((0..extra).map(|i| format!("node-{}", meter_ids.len() + i)));
        ids.enumerate()
            .map(|(i, id)| (id, self.stakes.get(i).copied().unwrap_or(1)))
            .collect()
    }
}
