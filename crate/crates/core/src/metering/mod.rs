//! Smart-meter data model and point-wise perturbation.
//!
//! A meter reports the energy consumed in each 10-minute interval, 144
//! intervals per day. Before a reading leaves the meter it is perturbed with
//! fresh noise from the meter's configured mechanism. The absolute error of
//! each perturbation is kept alongside the protected value for evaluation,
//! but never travels further than the meter.

mod ingest;
mod perturb;
mod synthetic;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dp::{DpError, Mechanism, PrivacyParams};

pub use ingest::{ingest_profile, parse_profile, profile_to_csv};
pub use perturb::{absolute_error, perturb_profile, perturb_with, MechanismNoise, NoiseSource};
pub use synthetic::generate_synthetic_profile;

/// Readings per day at one reading every 10 minutes.
pub const READINGS_PER_DAY: usize = 144;
/// Reporting interval in minutes.
pub const INTERVAL_MIN: u16 = 10;

#[derive(Debug, Error)]
pub enum MeteringError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("invalid profile: {0}")]
    Validation(String),
    #[error(transparent)]
    Dp(#[from] DpError),
}

pub type Result<T, E = MeteringError> = std::result::Result<T, E>;

/// Energy consumed in the 10 minutes preceding `timestamp_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeterReading {
    /// Minutes since midnight: 0, 10, …, 1430.
    pub timestamp_min: u16,
    pub wh: f64,
}

impl MeterReading {
    pub fn new(timestamp_min: u16, wh: f64) -> Result<Self> {
        if !timestamp_min.is_multiple_of(INTERVAL_MIN) || timestamp_min > 1430 {
            return Err(MeteringError::Validation(format!(
                "timestamp {timestamp_min} is not a multiple of 10 in [0, 1430]"
            )));
        }
        if !wh.is_finite() || wh < 0.0 {
            return Err(MeteringError::Validation(format!(
                "reading at {timestamp_min} must be a finite non-negative Wh value, got {wh}"
            )));
        }
        Ok(Self { timestamp_min, wh })
    }
}

/// One meter's day: exactly 144 readings at 0, 10, …, 1430.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyProfile {
    meter_id: String,
    readings: Vec<MeterReading>,
}

impl DailyProfile {
    pub fn new(meter_id: impl Into<String>, readings: Vec<MeterReading>) -> Result<Self> {
        let meter_id = meter_id.into();
        if meter_id.is_empty() || meter_id.len() > u16::MAX as usize {
            return Err(MeteringError::Validation("meter id must be 1..=65535 bytes".into()));
        }
        if readings.len() != READINGS_PER_DAY {
            return Err(MeteringError::Validation(format!(
                "expected {READINGS_PER_DAY} readings, found {}",
                readings.len()
            )));
        }
        for (i, r) in readings.iter().enumerate() {
            let expected = i as u16 * INTERVAL_MIN;
            if r.timestamp_min != expected {
                return Err(MeteringError::Validation(format!(
                    "reading {i} has timestamp {}, expected {expected}",
                    r.timestamp_min
                )));
            }
            MeterReading::new(r.timestamp_min, r.wh)?;
        }
        Ok(Self { meter_id, readings })
    }

    pub fn meter_id(&self) -> &str {
        &self.meter_id
    }

    pub fn readings(&self) -> &[MeterReading] {
        &self.readings
    }

    pub fn mean_wh(&self) -> f64 {
        self.readings.iter().map(|r| r.wh).sum::<f64>() / self.readings.len() as f64
    }

    /// Same readings under another meter id.
    pub fn with_meter_id(&self, meter_id: impl Into<String>) -> Result<Self> {
        Self::new(meter_id, self.readings.clone())
    }
}

/// A perturbed reading as produced on the meter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtectedReading {
    pub meter_id: String,
    pub timestamp_min: u16,
    /// May be negative.
    pub protected_wh: f64,
    pub mechanism: Mechanism,
    /// 0 for Uniform, which does not consume ε.
    pub epsilon_used: f64,
    /// |protected_wh − original|; meter-side only.
    pub abs_error: f64,
}

/// A meter participating in the ledger.
#[derive(Debug, Clone)]
pub struct SmartMeterNode {
    pub meter_id: String,
    pub profile: DailyProfile,
    pub mechanism: Mechanism,
    pub params: PrivacyParams,
    pub stake_tokens: u64,
}

impl SmartMeterNode {
    pub fn new(profile: DailyProfile, mechanism: Mechanism, params: PrivacyParams, stake_tokens: u64) -> Result<Self> {
        params.validate_for(mechanism)?;
        Ok(Self {
            meter_id: profile.meter_id().to_string(),
            profile,
            mechanism,
            params,
            stake_tokens,
        })
    }
}
