use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DpError, Mechanism, NoiseSample, PrivacyParams, Result};

/// Laplace scale b = Δ/ε.
pub fn laplace_scale(params: &PrivacyParams) -> Result<f64> {
    let eps = params.require_positive_epsilon()?;
    Ok(params.delta_db() / eps)
}

/// Gaussian standard deviation σ = Δ/ε.
pub fn gaussian_scale(params: &PrivacyParams) -> Result<f64> {
    laplace_scale(params)
}

/// Ratio parameter α = exp(−ε/Δ) of the two-sided geometric pmf.
pub fn geometric_success_prob(params: &PrivacyParams) -> Result<f64> {
    let eps = params.require_positive_epsilon()?;
    Ok((-eps / params.delta_db()).exp())
}

/// Half-width m = Δ/(2δ) of the Uniform support {−m, …, m − 1}.
///
/// Δ/δ must be a positive even integer. The ratio is accepted if it lies
/// within 1e-9 (relative) of one, which absorbs decimal representation error
/// such as 1/0.01.
pub fn uniform_half_support(params: &PrivacyParams) -> Result<i64> {
    let ratio = params.delta_db() / params.delta_reading();
    let nearest = ratio.round();
    let even_integer = (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0)
        && nearest >= 2.0
        && nearest < 2f64.powi(53)
        && (nearest as i64) % 2 == 0;
    if !even_integer {
        return Err(DpError::InvalidParameter(format!(
            "uniform support needs delta_db / delta_reading to be a positive even integer, got {ratio}"
        )));
    }
    Ok(nearest as i64 / 2)
}

/// Zero-mean Laplace noise by inverse CDF.
pub fn sample_laplace<R: Rng + ?Sized>(params: &PrivacyParams, rng: &mut R) -> Result<NoiseSample> {
    let b = laplace_scale(params)?;
    let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
    // u ∈ (−½, ½), so 1 − 2|u| ∈ (0, 1]
    let x = -b * u.signum() * (1.0 - 2.0 * u.abs()).ln();
    Ok(NoiseSample(if u == 0.0 { 0.0 } else { x }))
}

pub fn sample_gaussian<R: Rng + ?Sized>(params: &PrivacyParams, rng: &mut R) -> Result<NoiseSample> {
    let sigma = gaussian_scale(params)?;
    let z: f64 = rng.sample(StandardNormal);
    Ok(NoiseSample(sigma * z))
}

/// Integer noise uniform on {−Δ/(2δ), …, Δ/(2δ) − 1}. ε is not consulted.
pub fn sample_uniform<R: Rng + ?Sized>(params: &PrivacyParams, rng: &mut R) -> Result<NoiseSample> {
    let m = uniform_half_support(params)?;
    let k = rng.random_range(-m..m);
    Ok(NoiseSample(k as f64))
}

/// Two-sided geometric noise by inverse CDF.
///
/// With c = 1/(1+α) the CDF is
///   F(x) = c·α^(−x)        for x ≤ −1,
///   F(x) = 1 − c·α^(x+1)   for x ≥ 0.
pub fn sample_geometric<R: Rng + ?Sized>(params: &PrivacyParams, rng: &mut R) -> Result<NoiseSample> {
    let alpha = geometric_success_prob(params)?;
    let u: f64 = rng.sample(Open01);
    Ok(NoiseSample(geometric_inverse_cdf(alpha, u)))
}

pub(crate) fn geometric_inverse_cdf(alpha: f64, u: f64) -> f64 {
    let ln_alpha = alpha.ln();
    let neg_mass = alpha / (1.0 + alpha);
    if u < neg_mass {
        // smallest x ≤ −1 with α^(−x)/(1+α) ≥ u
        let t = (u * (1.0 + alpha)).ln() / ln_alpha;
        -(t.floor().max(1.0))
    } else {
        // smallest x ≥ 0 with α^(x+1) ≤ (1−u)(1+α)
        let t = ((1.0 - u) * (1.0 + alpha)).ln() / ln_alpha;
        (t.ceil() - 1.0).max(0.0)
    }
}

/// Dispatches to the sampler for `mechanism`.
///
/// `reading` is the true value being protected. Every mechanism here is
/// additive and data-independent, so it only participates in validation.
pub fn select_mechanism<R: Rng + ?Sized>(
    mechanism: Mechanism,
    params: &PrivacyParams,
    reading: f64,
    rng: &mut R,
) -> Result<NoiseSample> {
    if !reading.is_finite() {
        return Err(DpError::InvalidArgument(format!(
            "reading must be finite, got {reading}"
        )));
    }
    match mechanism {
        Mechanism::Laplace => sample_laplace(params, rng),
        Mechanism::Gaussian => sample_gaussian(params, rng),
        Mechanism::Uniform => sample_uniform(params, rng),
        Mechanism::Geometric => sample_geometric(params, rng),
    }
}
