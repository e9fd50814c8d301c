use rand::RngCore;

use super::{DailyProfile, ProtectedReading, Result, SmartMeterNode};
use crate::dp::{select_mechanism, DpError, Mechanism, NoiseSample, PrivacyParams};

/// Anything that can produce additive noise for a reading.
pub trait NoiseSource {
    fn mechanism(&self) -> Mechanism;
    /// ε recorded against each protected reading.
    fn epsilon_used(&self) -> f64;
    fn draw(&self, reading: f64, rng: &mut dyn RngCore) -> Result<NoiseSample, DpError>;
}

/// A mechanism with its calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismNoise {
    pub mechanism: Mechanism,
    pub params: PrivacyParams,
}

impl NoiseSource for MechanismNoise {
    fn mechanism(&self) -> Mechanism {
        self.mechanism
    }

    fn epsilon_used(&self) -> f64 {
        if self.mechanism.uses_epsilon() {
            self.params.epsilon()
        } else {
            0.0
        }
    }

    fn draw(&self, reading: f64, rng: &mut dyn RngCore) -> Result<NoiseSample, DpError> {
        select_mechanism(self.mechanism, &self.params, reading, rng)
    }
}

pub fn absolute_error(protected: f64, original: f64) -> f64 {
    (protected - original).abs()
}

/// Perturbs every reading of the node's profile with fresh noise.
pub fn perturb_profile(node: &SmartMeterNode, rng: &mut dyn RngCore) -> Result<Vec<ProtectedReading>> {
    let noise = MechanismNoise {
        mechanism: node.mechanism,
        params: node.params,
    };
    perturb_with(&node.profile, &noise, rng)
}

pub fn perturb_with<N: NoiseSource + ?Sized>(
    profile: &DailyProfile,
    noise: &N,
    rng: &mut dyn RngCore,
) -> Result<Vec<ProtectedReading>> {
    let mechanism = noise.mechanism();
    let epsilon_used = noise.epsilon_used();
    profile
        .readings()
        .iter()
        .map(|r| {
            let protected_wh = r.wh + noise.draw(r.wh, rng)?.value();
            Ok(ProtectedReading {
                meter_id: profile.meter_id().to_string(),
                timestamp_min: r.timestamp_min,
                protected_wh,
                mechanism,
                epsilon_used,
                abs_error: absolute_error(protected_wh, r.wh),
            })
        })
        .collect()
}
