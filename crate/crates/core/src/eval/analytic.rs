//! Closed-form expectations of |noise|, used as oracles for empirical MAE.

use std::f64::consts::PI;

use crate::dp::{
    gaussian_scale, geometric_success_prob, laplace_scale, uniform_half_support, Mechanism, PrivacyParams,
};

use super::Result;

/// Tail mass left out of truncated pmf sums.
const TAIL_MASS: f64 = 1e-12;

/// E|X| for the mechanism's noise X.
pub fn analytic_mae(mechanism: Mechanism, params: &PrivacyParams) -> Result<f64> {
    Ok(match mechanism {
        Mechanism::Laplace => laplace_scale(params)?,
        Mechanism::Gaussian => gaussian_scale(params)? * (2.0 / PI).sqrt(),
        Mechanism::Geometric => {
            let a = geometric_success_prob(params)?;
            2.0 * a / ((1.0 + a) * (1.0 - a))
        }
        Mechanism::Uniform => uniform_moments(params)?.0,
    })
}

/// Standard deviation of |X|.
pub fn analytic_abs_std(mechanism: Mechanism, params: &PrivacyParams) -> Result<f64> {
    Ok(match mechanism {
        // |X| is exponential with mean b
        Mechanism::Laplace => laplace_scale(params)?,
        Mechanism::Gaussian => gaussian_scale(params)? * (1.0 - 2.0 / PI).sqrt(),
        Mechanism::Geometric => {
            let mean = analytic_mae(mechanism, params)?;
            (geometric_second_moment(params)? - mean * mean).max(0.0).sqrt()
        }
        Mechanism::Uniform => {
            let (mean, second) = uniform_moments(params)?;
            (second - mean * mean).max(0.0).sqrt()
        }
    })
}

/// E[X²] of the two-sided geometric noise by summing k²·pmf(k) out to where
/// the remaining two-sided tail mass 2α^(K+1)/(1+α) drops below 1e-12.
pub fn geometric_second_moment(params: &PrivacyParams) -> Result<f64> {
    let a = geometric_success_prob(params)?;
    if a == 0.0 {
        return Ok(0.0);
    }
    let c = (1.0 - a) / (1.0 + a);
    let k_max = ((TAIL_MASS * (1.0 + a) / 2.0).ln() / a.ln()).ceil().max(1.0) as u64;
    let mut sum = 0.0;
    let mut weight = a; // α^k
    for k in 1..=k_max {
        let kf = k as f64;
        sum += kf * kf * weight;
        weight *= a;
    }
    Ok(2.0 * c * sum)
}

/// (E|k|, E[k²]) over the Uniform support, by enumeration.
fn uniform_moments(params: &PrivacyParams) -> Result<(f64, f64)> {
    let m = uniform_half_support(params)?;
    let n = (2 * m) as f64;
    let (abs_sum, sq_sum) = (-m..m).fold((0.0, 0.0), |(a, s), k| {
        let k = k as f64;
        (a + k.abs(), s + k * k)
    });
    Ok((abs_sum / n, sq_sum / n))
}
