//! Differential-privacy noise mechanisms.
//!
//! Four additive mechanisms are supported, all zero-mean:
//!
//! | mechanism | support  | scale                                  |
//! |-----------|----------|----------------------------------------|
//! | Laplace   | ℝ        | b = Δ/ε                                |
//! | Gaussian  | ℝ        | σ = Δ/ε                                |
//! | Uniform   | ℤ        | k ∈ {−Δ/(2δ), …, Δ/(2δ) − 1}, ε unused |
//! | Geometric | ℤ        | α = exp(−ε/Δ), pmf ∝ α^\|x\|            |
//!
//! Samplers take an explicit RNG and are otherwise pure.

mod density;
mod sample;
mod sensitivity;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use density::{cdf, density, log_density};
pub use sample::{
    gaussian_scale, geometric_success_prob, laplace_scale, sample_gaussian, sample_geometric, sample_laplace,
    sample_uniform, select_mechanism, uniform_half_support,
};
pub use sensitivity::{compute_sensitivity, Aggregate};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported mechanism `{0}` (expected laplace, gaussian, uniform or geometric)")]
    UnsupportedMechanism(String),
}

pub type Result<T, E = DpError> = std::result::Result<T, E>;

/// Noise mechanism tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Laplace,
    Gaussian,
    Uniform,
    Geometric,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::Laplace,
        Mechanism::Gaussian,
        Mechanism::Uniform,
        Mechanism::Geometric,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Laplace => "laplace",
            Mechanism::Gaussian => "gaussian",
            Mechanism::Uniform => "uniform",
            Mechanism::Geometric => "geometric",
        }
    }

    /// Uniform and Geometric emit integer-valued noise.
    pub fn is_discrete(self) -> bool {
        matches!(self, Mechanism::Uniform | Mechanism::Geometric)
    }

    /// Whether the privacy budget ε drives this mechanism's noise.
    pub fn uses_epsilon(self) -> bool {
        !matches!(self, Mechanism::Uniform)
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = DpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace" => Ok(Mechanism::Laplace),
            "gaussian" => Ok(Mechanism::Gaussian),
            "uniform" => Ok(Mechanism::Uniform),
            "geometric" => Ok(Mechanism::Geometric),
            other => Err(DpError::UnsupportedMechanism(other.to_string())),
        }
    }
}

/// Privacy budget and sensitivities.
///
/// * `epsilon` – privacy budget ε (dimensionless);
/// * `delta_reading` – reading sensitivity δ, granularity of the Uniform support;
/// * `delta_db` – dataset sensitivity Δ in Wh.
///
/// Construction only checks what holds for every mechanism. Mechanism-specific
/// requirements (ε > 0, Δ/δ even) are checked by the operations that need them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
    delta_reading: f64,
    delta_db: f64,
}

impl PrivacyParams {
    pub const DEFAULT_DELTA_DB: f64 = 1.0;

    pub fn new(epsilon: f64, delta_reading: f64, delta_db: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(DpError::InvalidParameter(format!(
                "epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        if !delta_reading.is_finite() || delta_reading <= 0.0 {
            return Err(DpError::InvalidParameter(format!(
                "reading sensitivity must be positive, got {delta_reading}"
            )));
        }
        if !delta_db.is_finite() || delta_db <= 0.0 {
            return Err(DpError::InvalidParameter(format!(
                "dataset sensitivity must be positive, got {delta_db}"
            )));
        }
        Ok(Self {
            epsilon,
            delta_reading,
            delta_db,
        })
    }

    /// ε with δ = Δ = 1.
    pub fn with_epsilon(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 1.0, Self::DEFAULT_DELTA_DB)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta_reading(&self) -> f64 {
        self.delta_reading
    }

    pub fn delta_db(&self) -> f64 {
        self.delta_db
    }

    pub(crate) fn require_positive_epsilon(&self) -> Result<f64> {
        if self.epsilon > 0.0 {
            Ok(self.epsilon)
        } else {
            Err(DpError::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )))
        }
    }

    /// Checks the requirements `mechanism` places on these parameters.
    pub fn validate_for(&self, mechanism: Mechanism) -> Result<()> {
        match mechanism {
            Mechanism::Uniform => uniform_half_support(self).map(|_| ()),
            _ => self.require_positive_epsilon().map(|_| ()),
        }
    }
}

/// One additive noise draw, in Wh.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NoiseSample(pub f64);

impl NoiseSample {
    pub fn value(self) -> f64 {
        self.0
    }
}
