//! Privacy/utility experiments.
//!
//! A sweep runs every (mechanism, grid value) pair for a number of seeded
//! days through the full meter → pool → block → chain pipeline and reports
//! the mean absolute error next to its closed-form expectation.

mod analytic;
mod report;
mod sweep;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dp::{DpError, Mechanism, PrivacyParams};
use crate::ledger::{LedgerError, StakeTable};
use crate::metering::{MeteringError, ProtectedReading};
use crate::rng::RngSeed;

pub use analytic::{analytic_abs_std, analytic_mae, geometric_second_moment};
pub use report::{emit_report, render_mae_csv, render_trace_csv, trace_file_name};
pub use sweep::{run_grid_point, run_sweep, GridPoint, SweepResult};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dp: {0}")]
    Dp(#[from] DpError),
    #[error("metering: {0}")]
    Metering(#[from] MeteringError),
    #[error("ledger: {0}")]
    Ledger(#[from] LedgerError),
    #[error("pipeline mismatch: {0}")]
    PipelineMismatch(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;

/// Sweep configuration.
///
/// ε-driven mechanisms run over `epsilon_grid`; Uniform runs over
/// `delta_reading_grid` and records ε as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub epsilon_grid: Vec<f64>,
    pub delta_reading_grid: Vec<f64>,
    pub mechanisms: Vec<Mechanism>,
    pub days: usize,
    pub master_seed: RngSeed,
    pub delta_db: f64,
    /// Miner/verifier stakes for the ledger leg. Empty means the metered
    /// home is the only node, with stake 1.
    pub stakes: StakeTable,
}

impl ExperimentConfig {
    pub const DEFAULT_EPSILONS: [f64; 6] = [0.01, 0.05, 0.1, 0.3, 0.7, 1.0];
    /// Every value keeps Δ/δ an even integer at Δ = 1.
    pub const DEFAULT_DELTAS: [f64; 6] = [0.01, 0.02, 0.05, 0.1, 0.25, 0.5];

    pub fn validate(&self) -> Result<()> {
        if self.mechanisms.is_empty() {
            return Err(EvalError::InvalidArgument("no mechanisms selected".into()));
        }
        if self.days == 0 {
            return Err(EvalError::InvalidArgument("days must be positive".into()));
        }
        for (name, grid) in [
            ("epsilon", &self.epsilon_grid),
            ("delta_reading", &self.delta_reading_grid),
        ] {
            let used = self.mechanisms.iter().any(|m| m.uses_epsilon() == (name == "epsilon"));
            if used && grid.is_empty() {
                return Err(EvalError::InvalidArgument(format!("{name} grid is empty")));
            }
            if let Some(bad) = grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(EvalError::InvalidArgument(format!(
                    "{name} grid value {bad} is not positive"
                )));
            }
        }
        for point in self.grid_points()? {
            point.params.validate_for(point.mechanism)?;
        }
        Ok(())
    }

    /// Expands the grids into one point per (mechanism, value), in config order.
    pub fn grid_points(&self) -> Result<Vec<GridPoint>> {
        let mut points = Vec::new();
        for &mechanism in &self.mechanisms {
            if mechanism.uses_epsilon() {
                for &eps in &self.epsilon_grid {
                    points.push(GridPoint {
                        mechanism,
                        param_name: "epsilon",
                        param_value: eps,
                        params: PrivacyParams::new(eps, 1.0, self.delta_db)?,
                    });
                }
            } else {
                for &delta in &self.delta_reading_grid {
                    points.push(GridPoint {
                        mechanism,
                        param_name: "delta",
                        param_value: delta,
                        params: PrivacyParams::new(0.0, delta, self.delta_db)?,
                    });
                }
            }
        }
        Ok(points)
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            epsilon_grid: Self::DEFAULT_EPSILONS.to_vec(),
            delta_reading_grid: Self::DEFAULT_DELTAS.to_vec(),
            mechanisms: Mechanism::ALL.to_vec(),
            days: 100,
            master_seed: RngSeed(0),
            delta_db: PrivacyParams::DEFAULT_DELTA_DB,
            stakes: StakeTable::new(),
        }
    }
}

/// MAE summary for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaeEntry {
    pub mechanism: Mechanism,
    pub param_name: String,
    pub param_value: f64,
    pub epsilon: f64,
    pub empirical_mae_wh: f64,
    pub analytic_mae_wh: f64,
    /// analytic std of |noise| / √n_readings
    pub std_error_wh: f64,
    pub n_readings: usize,
    /// MAE recomputed from ledger transactions joined with ground truth.
    pub ledger_mae_wh: f64,
}

impl MaeEntry {
    /// Whether the empirical MAE lies within `k` standard errors of the analytic one.
    pub fn within(&self, k: f64) -> bool {
        (self.empirical_mae_wh - self.analytic_mae_wh).abs() <= k * self.std_error_wh
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaeReport {
    pub entries: Vec<MaeEntry>,
    /// Per mechanism: is the MAE strictly decreasing as the grid parameter grows?
    pub strictly_decreasing: BTreeMap<Mechanism, bool>,
}

impl MaeReport {
    pub fn from_entries(entries: Vec<MaeEntry>) -> Self {
        let mut by_mech: BTreeMap<Mechanism, Vec<(f64, f64)>> = BTreeMap::new();
        for e in &entries {
            by_mech
                .entry(e.mechanism)
                .or_default()
                .push((e.param_value, e.empirical_mae_wh));
        }
        let strictly_decreasing = by_mech
            .into_iter()
            .map(|(m, mut pts)| {
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                (m, pts.windows(2).all(|w| w[1].1 < w[0].1))
            })
            .collect();
        Self {
            entries,
            strictly_decreasing,
        }
    }

    pub fn entry(&self, mechanism: Mechanism, param_value: f64) -> Option<&MaeEntry> {
        self.entries
            .iter()
            .find(|e| e.mechanism == mechanism && e.param_value == param_value)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Original vs protected readings for one representative day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub mechanism: Mechanism,
    pub param_name: String,
    pub param_value: f64,
    pub points: Vec<TracePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub timestamp_min: u16,
    pub original_wh: f64,
    pub protected_wh: f64,
}

/// Mean absolute error: (1/N) Σ |protected − original|.
pub fn mae(protected: &[ProtectedReading]) -> Result<f64> {
    if protected.is_empty() {
        return Err(EvalError::InvalidArgument("MAE of no readings".into()));
    }
    Ok(protected.iter().map(|p| p.abs_error).sum::<f64>() / protected.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_error(e: f64) -> ProtectedReading {
        ProtectedReading {
            meter_id: "m".into(),
            timestamp_min: 0,
            protected_wh: 0.0,
            mechanism: Mechanism::Laplace,
            epsilon_used: 0.01,
            abs_error: e,
        }
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&vec![with_error(0.0); 144]).unwrap(), 0.0);
        assert_eq!(mae(&vec![with_error(5.0); 144]).unwrap(), 5.0);
        assert!(matches!(mae(&[]), Err(EvalError::InvalidArgument(_))));
    }

    #[test]
    fn default_grid_is_valid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.grid_points().unwrap().len(), 24);
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = ExperimentConfig::default;
        assert!(ExperimentConfig { days: 0, ..base() }.validate().is_err());
        assert!(ExperimentConfig {
            epsilon_grid: vec![0.01, 0.0],
            ..base()
        }
        .validate()
        .is_err());
        let bad_delta = ExperimentConfig {
            delta_reading_grid: vec![0.3],
            ..base()
        };
        assert!(matches!(bad_delta.validate(), Err(EvalError::Dp(_))));

        // a bad uniform grid is irrelevant when Uniform is not selected
        let laplace_only = ExperimentConfig {
            mechanisms: vec![Mechanism::Laplace],
            delta_reading_grid: vec![],
            ..base()
        };
        assert!(laplace_only.validate().is_ok());
    }

    #[test]
    fn monotonicity_summary() {
        let entry = |v: f64, m: f64| MaeEntry {
            mechanism: Mechanism::Laplace,
            param_name: "epsilon".into(),
            param_value: v,
            epsilon: v,
            empirical_mae_wh: m,
            analytic_mae_wh: m,
            std_error_wh: 1.0,
            n_readings: 144,
            ledger_mae_wh: m,
        };
        let r = MaeReport::from_entries(vec![entry(0.05, 20.0), entry(0.01, 100.0), entry(1.0, 1.0)]);
        assert!(r.strictly_decreasing[&Mechanism::Laplace]);
        let r = MaeReport::from_entries(vec![entry(0.01, 100.0), entry(0.05, 100.0)]);
        assert!(!r.strictly_decreasing[&Mechanism::Laplace]);
    }
}
