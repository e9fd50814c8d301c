use std::collections::HashMap;

use rayon::prelude::*;

use super::{
    analytic_abs_std, analytic_mae, EvalError, ExperimentConfig, MaeEntry, MaeReport, Result, Trace, TracePoint,
};
use crate::dp::{Mechanism, PrivacyParams};
use crate::ledger::{validate_chain, Ledger, StakeTable};
use crate::metering::{absolute_error, perturb_profile, DailyProfile, SmartMeterNode};
use crate::rng::RngSeed;

/// Largest per-reading difference between meter-side and ledger-side
/// absolute error: half a mWh of rounding plus float slack.
const LEDGER_ROUNDING_WH: f64 = 0.0005 + 1e-9;

/// One (mechanism, grid value) cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub mechanism: Mechanism,
    /// `"epsilon"` or `"delta"`.
    pub param_name: &'static str,
    pub param_value: f64,
    pub params: PrivacyParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub report: MaeReport,
    pub traces: Vec<Trace>,
}

/// Runs every grid point of `config` against `profile`.
///
/// Grid points run in parallel, each on its own RNG streams derived from the
/// master seed, mechanism, grid value and day index, so the result does not
/// depend on scheduling. Any failure discards the whole sweep.
pub fn run_sweep(config: &ExperimentConfig, profile: &DailyProfile) -> Result<SweepResult> {
    config.validate()?;
    let points = config.grid_points()?;
    let stakes = if config.stakes.is_empty() {
        [(profile.meter_id().to_string(), 1)].into_iter().collect()
    } else {
        config.stakes.clone()
    };
    let cells: Vec<(MaeEntry, Trace)> = points
        .par_iter()
        .map(|p| run_grid_point(p, profile, config.days, config.master_seed, &stakes))
        .collect::<Result<_>>()?;
    let (entries, traces) = cells.into_iter().unzip();
    Ok(SweepResult {
        report: MaeReport::from_entries(entries),
        traces,
    })
}

/// `days` perturbed days of one grid point, each mined into its own block.
///
/// Returns the MAE entry and day 0 as the representative trace. The MAE is
/// also recomputed from the mined transactions joined against the ground
/// truth; a disagreement beyond ledger rounding is an error.
pub fn run_grid_point(
    point: &GridPoint,
    profile: &DailyProfile,
    days: usize,
    master_seed: RngSeed,
    stakes: &StakeTable,
) -> Result<(MaeEntry, Trace)> {
    if days == 0 {
        return Err(EvalError::InvalidArgument("days must be positive".into()));
    }
    let stake = stakes.get(profile.meter_id()).unwrap_or(0);
    let node = SmartMeterNode::new(profile.clone(), point.mechanism, point.params, stake)?;
    let mut ledger = Ledger::new(stakes.clone())?;
    let value_bits = point.param_value.to_bits().to_be_bytes();

    let mut meter_sum = 0.0;
    let mut ledger_sum = 0.0;
    let mut trace = Vec::new();
    let mut ground_truth: HashMap<u64, (f64, f64)> = HashMap::with_capacity(profile.readings().len());

    for day in 0..days {
        let day_bytes = (day as u64).to_be_bytes();
        let mut rng = master_seed.derive([
            point.mechanism.as_str().as_bytes(),
            point.param_name.as_bytes(),
            &value_bits[..],
            &day_bytes[..],
        ]);
        let protected = perturb_profile(&node, &mut rng)?;

        ground_truth.clear();
        for (p, r) in protected.iter().zip(profile.readings()) {
            let tx = ledger.submit(p)?;
            ground_truth.insert(tx.nonce, (r.wh, p.abs_error));
            meter_sum += p.abs_error;
        }
        if day == 0 {
            trace = protected
                .iter()
                .zip(profile.readings())
                .map(|(p, r)| TracePoint {
                    timestamp_min: r.timestamp_min,
                    original_wh: r.wh,
                    protected_wh: p.protected_wh,
                })
                .collect();
        }

        let outcome = ledger.run_round(&mut rng)?;
        if !outcome.verdict.accepted {
            let reason = outcome.verdict.rejection.map(|r| r.to_string()).unwrap_or_default();
            return Err(EvalError::PipelineMismatch(format!(
                "day {day} block rejected: {reason}"
            )));
        }
        for tx in &ledger.last_block().txs {
            let (original, meter_err) = ground_truth
                .get(&tx.nonce)
                .copied()
                .ok_or_else(|| EvalError::PipelineMismatch(format!("nonce {} has no ground truth", tx.nonce)))?;
            let ledger_err = absolute_error(tx.protected_wh(), original);
            if (ledger_err - meter_err).abs() > LEDGER_ROUNDING_WH {
                return Err(EvalError::PipelineMismatch(format!(
                    "day {day}, t={}: ledger error {ledger_err} vs meter error {meter_err}",
                    tx.timestamp_min
                )));
            }
            ledger_sum += ledger_err;
        }
    }

    let report = validate_chain(ledger.chain());
    if let Some(v) = report.first_violation {
        return Err(EvalError::PipelineMismatch(format!(
            "chain invalid at height {}: {}",
            v.height, v.reason
        )));
    }

    let n_readings = days * profile.readings().len();
    let analytic = analytic_mae(point.mechanism, &point.params)?;
    let std = analytic_abs_std(point.mechanism, &point.params)?;
    let entry = MaeEntry {
        mechanism: point.mechanism,
        param_name: point.param_name.to_string(),
        param_value: point.param_value,
        epsilon: if point.mechanism.uses_epsilon() {
            point.params.epsilon()
        } else {
            0.0
        },
        empirical_mae_wh: meter_sum / n_readings as f64,
        analytic_mae_wh: analytic,
        std_error_wh: std / (n_readings as f64).sqrt(),
        n_readings,
        ledger_mae_wh: ledger_sum / n_readings as f64,
    };
    let trace = Trace {
        mechanism: point.mechanism,
        param_name: point.param_name.to_string(),
        param_value: point.param_value,
        points: trace,
    };
    Ok((entry, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metering::generate_synthetic_profile;

    fn profile() -> DailyProfile {
        generate_synthetic_profile("home", RngSeed(1), 872.0).unwrap()
    }

    #[test]
    fn small_sweep_shapes() {
        let cfg = ExperimentConfig {
            epsilon_grid: vec![0.05, 1.0],
            delta_reading_grid: vec![0.1],
            days: 3,
            ..ExperimentConfig::default()
        };
        let out = run_sweep(&cfg, &profile()).unwrap();
        assert_eq!(out.report.entries.len(), 3 * 2 + 1);
        assert_eq!(out.traces.len(), 7);
        for e in &out.report.entries {
            assert_eq!(e.n_readings, 432);
            assert!((e.empirical_mae_wh - e.ledger_mae_wh).abs() <= 0.0005);
        }
        let u = out.report.entry(Mechanism::Uniform, 0.1).unwrap();
        assert_eq!(u.epsilon, 0.0);
        assert_eq!(u.param_name, "delta");
        assert!(out.traces.iter().all(|t| t.points.len() == 144));
    }

    #[test]
    fn epsilon_one_sweep_is_nearly_noiseless() {
        let cfg = ExperimentConfig {
            epsilon_grid: vec![1.0],
            mechanisms: vec![Mechanism::Laplace, Mechanism::Gaussian, Mechanism::Geometric],
            days: 5,
            ..ExperimentConfig::default()
        };
        let out = run_sweep(&cfg, &profile()).unwrap();
        for e in &out.report.entries {
            assert!(e.empirical_mae_wh <= 2.0, "{e:?}");
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = ExperimentConfig {
            epsilon_grid: vec![0.01, 0.1],
            delta_reading_grid: vec![0.05],
            days: 2,
            master_seed: RngSeed(77),
            ..ExperimentConfig::default()
        };
        let a = run_sweep(&cfg, &profile()).unwrap();
        let b = run_sweep(&cfg, &profile()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_grid_fails_whole_sweep() {
        let cfg = ExperimentConfig {
            delta_reading_grid: vec![0.1, 0.3],
            days: 1,
            ..ExperimentConfig::default()
        };
        assert!(run_sweep(&cfg, &profile()).is_err());
    }

    #[test]
    fn stake_table_drives_verifiers() {
        let stakes: StakeTable = [("home", 1), ("n1", 3), ("n2", 2)].into_iter().collect();
        let cfg = ExperimentConfig {
            epsilon_grid: vec![0.1],
            mechanisms: vec![Mechanism::Laplace],
            days: 4,
            stakes,
            ..ExperimentConfig::default()
        };
        let out = run_sweep(&cfg, &profile()).unwrap();
        assert_eq!(out.report.entries.len(), 1);
    }
}
