//! Command implementations behind the `dpmeter` binary.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage or parse error.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use dpmeter_core::eval::{emit_report, run_sweep, ExperimentConfig};
use dpmeter_core::format::{atomic_write, sig6};
use dpmeter_core::ledger::{chain_from_jsonl, chain_to_jsonl, validate_chain, Ledger};
use dpmeter_core::metering::{generate_synthetic_profile, ingest_profile, perturb_profile, profile_to_csv};
use dpmeter_core::{
    DailyProfile, DpError, EvalError, LedgerError, Mechanism, MeteringError, PrivacyParams, ProtectedReading, RngSeed,
    SmartMeterNode,
};

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl From<DpError> for CliError {
    fn from(e: DpError) -> Self {
        CliError::Domain(format!("dp: {e}"))
    }
}

impl From<MeteringError> for CliError {
    fn from(e: MeteringError) -> Self {
        match e {
            MeteringError::Io { .. } => CliError::Usage(format!("metering: {e}")),
            MeteringError::Parse { .. } => CliError::Parse(format!("metering: {e}")),
            _ => CliError::Domain(format!("metering: {e}")),
        }
    }
}

impl From<LedgerError> for CliError {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::Parse { .. } => CliError::Parse(format!("ledger: {e}")),
            _ => CliError::Domain(format!("ledger: {e}")),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Domain(format!("eval: {e}"))
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// What a successful command printed and wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Loads the configured profiles, or generates `meters` synthetic ones
/// named `meter-<i>`. A profile's meter id is its file stem.
pub fn load_profiles(cfg: &RunConfig) -> Result<Vec<DailyProfile>> {
    if cfg.profiles.is_empty() {
        return (0..cfg.meters)
            .map(|i| {
                Ok(generate_synthetic_profile(
                    &format!("meter-{i}"),
                    RngSeed(cfg.seed),
                    cfg.mean_wh,
                )?)
            })
            .collect();
    }
    let profiles: Vec<DailyProfile> = cfg
        .profiles
        .iter()
        .map(|path| {
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| CliError::Usage(format!("cannot derive a meter id from {}", path.display())))?;
            Ok(ingest_profile(path, id)?)
        })
        .collect::<Result<_>>()?;
    for (i, p) in profiles.iter().enumerate() {
        if profiles[..i].iter().any(|q| q.meter_id() == p.meter_id()) {
            return Err(CliError::Usage(format!("duplicate meter id `{}`", p.meter_id())));
        }
    }
    Ok(profiles)
}

fn write_all(files: &[(PathBuf, String)], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |path: &Path, e: std::io::Error| CliError::Domain(format!("cannot write {}: {e}", path.display()));
    std::fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    for (path, contents) in files {
        atomic_write(path, contents.as_bytes()).map_err(|e| io(path, e))?;
    }
    Ok(files.iter().map(|(p, _)| p.clone()).collect())
}

/// Validates profiles and writes a normalized copy of each to
/// `<out>/profile_<meter_id>.csv`.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<Outcome> {
    let profiles = load_profiles(cfg)?;
    let mut summary = String::new();
    let mut files = Vec::new();
    for p in &profiles {
        let (min, max) = p
            .readings()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.wh), hi.max(r.wh))
            });
        writeln!(
            summary,
            "{}: {} readings, mean {} Wh, min {} Wh, max {} Wh",
            p.meter_id(),
            p.readings().len(),
            sig6(p.mean_wh()),
            sig6(min),
            sig6(max)
        )
        .unwrap();
        files.push((cfg.out.join(format!("profile_{}.csv", p.meter_id())), profile_to_csv(p)));
    }
    Ok(Outcome {
        summary,
        files: write_all(&files, &cfg.out)?,
    })
}

/// The single mechanism and parameters a simulate run uses.
pub fn simulate_params(cfg: &RunConfig) -> Result<(Mechanism, PrivacyParams)> {
    let [mechanism] = cfg.mechanisms[..] else {
        return Err(CliError::Usage(format!(
            "simulate needs exactly one mechanism, got {}",
            cfg.mechanisms.len()
        )));
    };
    let (name, grid) = if mechanism.uses_epsilon() {
        ("epsilon", &cfg.epsilons)
    } else {
        ("delta_reading", &cfg.delta_readings)
    };
    let [value] = grid[..] else {
        return Err(CliError::Usage(format!(
            "simulate needs exactly one {name} value, got {}",
            grid.len()
        )));
    };
    let params = if mechanism.uses_epsilon() {
        PrivacyParams::new(value, 1.0, cfg.delta_db)?
    } else {
        PrivacyParams::new(0.0, value, cfg.delta_db)?
    };
    params.validate_for(mechanism)?;
    Ok((mechanism, params))
}

/// One day for every meter: perturb, submit, elect, mine, verify, append.
///
/// Readings are submitted slot by slot, meter by meter, and one block is
/// mined per `slots_per_block` slots. Writes `chain.jsonl` and
/// `protected.csv` once everything has succeeded.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let (mechanism, params) = simulate_params(cfg)?;
    let profiles = load_profiles(cfg)?;
    let ids: Vec<String> = profiles.iter().map(|p| p.meter_id().to_string()).collect();
    let stakes = cfg.stake_table(&ids);
    let seed = RngSeed(cfg.seed);

    let mut days: Vec<Vec<ProtectedReading>> = Vec::with_capacity(profiles.len());
    for p in &profiles {
        let stake = stakes.get(p.meter_id()).unwrap_or(0);
        let node = SmartMeterNode::new(p.clone(), mechanism, params, stake)?;
        let mut rng = seed.derive([b"simulate".as_slice(), p.meter_id().as_bytes()]);
        days.push(perturb_profile(&node, &mut rng)?);
    }

    let mut ledger = Ledger::new(stakes)?;
    let mut election = seed.derive([b"simulate-election".as_slice()]);
    let slots = days.first().map_or(0, Vec::len);
    let mut slot = 0;
    while slot < slots {
        let end = (slot + cfg.slots_per_block).min(slots);
        for day in &days {
            for reading in &day[slot..end] {
                ledger.submit(reading)?;
            }
        }
        let outcome = ledger.run_round(&mut election)?;
        if !outcome.verdict.accepted {
            let reason = outcome.verdict.rejection.map(|r| r.to_string()).unwrap_or_default();
            return Err(CliError::Domain(format!(
                "ledger: block {} rejected: {reason}",
                outcome.height
            )));
        }
        slot = end;
    }

    let report = validate_chain(ledger.chain());
    if let Some(v) = report.first_violation {
        return Err(CliError::Domain(format!(
            "ledger: chain invalid at height {}: {}",
            v.height, v.reason
        )));
    }

    let mut csv = String::from("meter_id,timestamp_min,mechanism,epsilon,protected_wh");
    csv.push_str(if cfg.with_ground_truth {
        ",original_wh,abs_error\n"
    } else {
        "\n"
    });
    // slot-major, matching submission order
    for s in 0..slots {
        for (day, profile) in days.iter().zip(&profiles) {
            let p = &day[s];
            write!(
                csv,
                "{},{},{},{},{:.3}",
                p.meter_id,
                p.timestamp_min,
                p.mechanism,
                sig6(p.epsilon_used),
                p.protected_wh
            )
            .unwrap();
            if cfg.with_ground_truth {
                write!(csv, ",{:.3},{:.3}", profile.readings()[s].wh, p.abs_error).unwrap();
            }
            csv.push('\n');
        }
    }

    let chain = ledger.chain();
    let tx_count: usize = chain.blocks().iter().map(|b| b.txs.len()).sum();
    let files = vec![
        (cfg.out.join("chain.jsonl"), chain_to_jsonl(chain)),
        (cfg.out.join("protected.csv"), csv),
    ];
    let files = write_all(&files, &cfg.out)?;
    let mut summary = format!(
        "{} meter(s), {mechanism}, {} blocks after genesis, {tx_count} transactions\n",
        profiles.len(),
        chain.len() - 1
    );
    for (miner, n) in ledger.rewards() {
        writeln!(summary, "  {miner}: mined {n}").unwrap();
    }
    Ok(Outcome { summary, files })
}

/// Runs the MAE sweep on the first configured profile and writes the report.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let profiles = load_profiles(cfg)?;
    let profile = &profiles[0];
    let experiment = ExperimentConfig {
        epsilon_grid: cfg.epsilons.clone(),
        delta_reading_grid: cfg.delta_readings.clone(),
        mechanisms: cfg.mechanisms.clone(),
        days: cfg.days,
        master_seed: RngSeed(cfg.seed),
        delta_db: cfg.delta_db,
        stakes: cfg.stake_table(&[profile.meter_id().to_string()]),
    };
    // fail on bad grids before any sweep work
    experiment.validate()?;
    let result = run_sweep(&experiment, profile)?;
    let files = emit_report(&result.report, &result.traces, &cfg.out)?;

    let mut summary = String::from("mechanism  param  value  empirical_mae_wh  analytic_mae_wh\n");
    for e in &result.report.entries {
        writeln!(
            summary,
            "{}  {}  {}  {}  {}",
            e.mechanism,
            e.param_name,
            sig6(e.param_value),
            sig6(e.empirical_mae_wh),
            sig6(e.analytic_mae_wh)
        )
        .unwrap();
    }
    writeln!(summary, "wrote {} files to {}", files.len(), cfg.out.display()).unwrap();
    Ok(Outcome { summary, files })
}

/// Checks a JSONL chain export. A broken chain is a domain failure naming
/// the first violating height.
pub fn cmd_verify_chain(path: &Path) -> Result<Outcome> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let chain = chain_from_jsonl(&text)?;
    let report = validate_chain(&chain);
    match report.first_violation {
        None => Ok(Outcome {
            summary: format!("chain valid: {} blocks\n", report.blocks),
            files: Vec::new(),
        }),
        Some(v) => Err(CliError::Domain(format!(
            "ledger: chain invalid at height {}: {}",
            v.height, v.reason
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn cfg(pairs: &[(&str, &str)], out: &Path) -> RunConfig {
        let mut flags: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        flags.insert("out".into(), out.display().to_string());
        RunConfig::resolve(&BTreeMap::new(), &flags).unwrap()
    }

    #[test]
    fn simulate_writes_one_block_per_day() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(&[("mechanism", "laplace"), ("epsilon", "0.01")], dir.path());
        let out = cmd_simulate(&c).unwrap();
        assert_eq!(out.files.len(), 2);
        let chain = chain_from_jsonl(&std::fs::read_to_string(dir.path().join("chain.jsonl")).unwrap()).unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(chain.blocks()[1].txs.len(), 144);
        cmd_verify_chain(&dir.path().join("chain.jsonl")).unwrap();
    }

    #[test]
    fn simulate_rejects_zero_epsilon_before_output() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let c = cfg(&[("mechanism", "laplace"), ("epsilon", "0")], &out);
        let err = cmd_simulate(&c).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().starts_with("dp:"), "{err}");
        assert!(!out.exists());
    }

    #[test]
    fn simulate_needs_single_point() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(&[("mechanism", "laplace")], dir.path());
        assert_eq!(cmd_simulate(&c).unwrap_err().exit_code(), 2);
        let c = cfg(&[("mechanism", "uniform"), ("delta_reading", "0.3")], dir.path());
        assert_eq!(cmd_simulate(&c).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn ground_truth_columns() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(
            &[
                ("mechanism", "geometric"),
                ("epsilon", "1"),
                ("with_ground_truth", "true"),
                ("meters", "2"),
            ],
            dir.path(),
        );
        cmd_simulate(&c).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("protected.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "meter_id,timestamp_min,mechanism,epsilon,protected_wh,original_wh,abs_error"
        );
        assert_eq!(lines.count(), 288);
    }

    #[test]
    fn ingest_round_trips_profiles() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(&[("meters", "2")], dir.path());
        let out = cmd_ingest(&c).unwrap();
        assert_eq!(out.files.len(), 2);
        let path = dir.path().join("profile_meter-1.csv");
        let c2 = cfg(&[("profile", path.to_str().unwrap())], &dir.path().join("again"));
        let p = load_profiles(&c2).unwrap();
        assert_eq!(p[0].meter_id(), "profile_meter-1");
        assert_eq!(p[0].readings(), load_profiles(&c).unwrap()[1].readings());
    }

    #[test]
    fn verify_chain_errors() {
        let dir = tempfile::tempdir().unwrap();
        let missing = cmd_verify_chain(&dir.path().join("nope.jsonl")).unwrap_err();
        assert_eq!(missing.exit_code(), 2);
        let bad = dir.path().join("bad.jsonl");
        std::fs::write(&bad, "{not json}\n").unwrap();
        assert_eq!(cmd_verify_chain(&bad).unwrap_err().exit_code(), 2);
    }
}
