//! Differentially private smart-meter reporting over a simulated
//! proof-of-stake ledger.
//!
//! * [`dp`] – Laplace, Gaussian, Uniform and Geometric noise mechanisms;
//! * [`metering`] – daily load profiles and point-wise perturbation;
//! * [`ledger`] – mining pool, stake-weighted election, hash-linked blocks;
//! * [`eval`] – ε/δ sweeps, MAE against closed-form expectations, reports;
//! * [`gof`] – goodness-of-fit tests used to check the samplers.

pub mod dp;
pub mod eval;
pub mod format;
pub mod gof;
pub mod ledger;
pub mod metering;
pub mod rng;

pub use dp::{DpError, Mechanism, NoiseSample, PrivacyParams};
pub use eval::{EvalError, ExperimentConfig, MaeReport};
pub use ledger::{Block, Chain, LedgerError, StakeTable, Transaction};
pub use metering::{DailyProfile, MeterReading, MeteringError, ProtectedReading, SmartMeterNode};
pub use rng::{RngSeed, SimRng};
