use std::f64::consts::PI;

use statrs::function::erf::erfc;

use super::sample::{gaussian_scale, geometric_success_prob, laplace_scale, uniform_half_support};
use super::{DpError, Mechanism, PrivacyParams, Result};

fn require_integer(mechanism: Mechanism, x: f64) -> Result<i64> {
    if x.is_finite() && x.fract() == 0.0 {
        Ok(x as i64)
    } else {
        Err(DpError::InvalidArgument(format!(
            "{mechanism} is discrete; density needs an integer argument, got {x}"
        )))
    }
}

/// pdf (Laplace, Gaussian) or pmf (Uniform, Geometric) of the zero-mean noise at `x`.
pub fn density(mechanism: Mechanism, params: &PrivacyParams, x: f64) -> Result<f64> {
    match mechanism {
        Mechanism::Uniform => {
            let k = require_integer(mechanism, x)?;
            let m = uniform_half_support(params)?;
            Ok(if (-m..m).contains(&k) {
                params.delta_reading() / params.delta_db()
            } else {
                0.0
            })
        }
        _ => log_density(mechanism, params, x).map(f64::exp),
    }
}

/// Natural log of [`density`]; −∞ outside the support.
///
/// Stays finite far into the tails where `density` underflows.
pub fn log_density(mechanism: Mechanism, params: &PrivacyParams, x: f64) -> Result<f64> {
    match mechanism {
        Mechanism::Laplace => {
            let b = laplace_scale(params)?;
            Ok(-x.abs() / b - (2.0 * b).ln())
        }
        Mechanism::Gaussian => {
            let s = gaussian_scale(params)?;
            Ok(-(x * x) / (2.0 * s * s) - 0.5 * (2.0 * PI * s * s).ln())
        }
        Mechanism::Uniform => density(mechanism, params, x).map(f64::ln),
        Mechanism::Geometric => {
            let k = require_integer(mechanism, x)?;
            let alpha = geometric_success_prob(params)?;
            let ln_alpha = -params.epsilon() / params.delta_db();
            Ok(((1.0 - alpha) / (1.0 + alpha)).ln() + ln_alpha * k.unsigned_abs() as f64)
        }
    }
}

/// P(X ≤ x). For the discrete mechanisms `x` is floored first.
pub fn cdf(mechanism: Mechanism, params: &PrivacyParams, x: f64) -> Result<f64> {
    match mechanism {
        Mechanism::Laplace => {
            let b = laplace_scale(params)?;
            Ok(if x < 0.0 {
                0.5 * (x / b).exp()
            } else {
                1.0 - 0.5 * (-x / b).exp()
            })
        }
        Mechanism::Gaussian => {
            let s = gaussian_scale(params)?;
            Ok(0.5 * erfc(-x / (s * std::f64::consts::SQRT_2)))
        }
        Mechanism::Uniform => {
            let m = uniform_half_support(params)?;
            let k = x.floor();
            Ok(((k + 1.0 + m as f64) / (2 * m) as f64).clamp(0.0, 1.0))
        }
        Mechanism::Geometric => {
            let alpha = geometric_success_prob(params)?;
            let k = x.floor();
            Ok(if k <= -1.0 {
                alpha.powf(-k) / (1.0 + alpha)
            } else {
                1.0 - alpha.powf(k + 1.0) / (1.0 + alpha)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(e: f64) -> PrivacyParams {
        PrivacyParams::with_epsilon(e).unwrap()
    }

    #[test]
    fn point_values() {
        let d = density(Mechanism::Laplace, &eps(0.01), 0.0).unwrap();
        assert!((d - 0.005).abs() < 1e-15);
        let d = density(Mechanism::Gaussian, &eps(0.01), 0.0).unwrap();
        assert!((d - 0.003989).abs() < 1e-6);
        let uni = PrivacyParams::new(0.0, 0.01, 1.0).unwrap();
        assert_eq!(density(Mechanism::Uniform, &uni, 60.0).unwrap(), 0.0);
        assert_eq!(density(Mechanism::Uniform, &uni, -50.0).unwrap(), 0.01);
        assert_eq!(density(Mechanism::Uniform, &uni, 50.0).unwrap(), 0.0);
    }

    #[test]
    fn geometric_pmf_at_zero_for_half_alpha() {
        // α = 0.5 ⇔ ε/Δ = ln 2
        let p = eps(std::f64::consts::LN_2);
        let d = density(Mechanism::Geometric, &p, 0.0).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn discrete_rejects_fractional_argument() {
        let p = PrivacyParams::new(0.1, 0.5, 1.0).unwrap();
        for m in [Mechanism::Uniform, Mechanism::Geometric] {
            assert!(matches!(density(m, &p, 0.5), Err(DpError::InvalidArgument(_))));
        }
    }

    #[test]
    fn cdf_matches_pmf_partial_sums() {
        let p = eps(0.3);
        let mut acc = 0.0;
        for k in -200..=20 {
            acc += density(Mechanism::Geometric, &p, k as f64).unwrap();
            let c = cdf(Mechanism::Geometric, &p, k as f64).unwrap();
            assert!((acc - c).abs() < 1e-12, "k={k}: {acc} vs {c}");
        }
        let uni = PrivacyParams::new(0.0, 0.1, 1.0).unwrap();
        let mut acc = 0.0;
        for k in -7..7 {
            acc += density(Mechanism::Uniform, &uni, k as f64).unwrap();
            assert!((acc - cdf(Mechanism::Uniform, &uni, k as f64).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn continuous_cdf_matches_quadrature() {
        // composite Simpson on [−20b, x]
        for m in [Mechanism::Laplace, Mechanism::Gaussian] {
            let p = eps(0.05);
            let b = 20.0;
            for &x in &[-30.0, -1.0, 0.0, 7.5, 44.0] {
                let (lo, n) = (-20.0 * b, 20_000);
                let h = (x - lo) / n as f64;
                let f = |t: f64| density(m, &p, t).unwrap();
                let mut s = f(lo) + f(x);
                for i in 1..n {
                    let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                    s += w * f(lo + i as f64 * h);
                }
                let q = s * h / 3.0;
                let c = cdf(m, &p, x).unwrap();
                assert!((q - c).abs() < 1e-6, "{m} at {x}: {q} vs {c}");
            }
        }
    }
}
