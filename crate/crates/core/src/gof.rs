//! Goodness-of-fit tests: one-sample Kolmogorov–Smirnov for continuous
//! distributions and Pearson chi-square for discrete ones.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom (chi-square only).
    pub dof: Option<usize>,
}

impl GofOutcome {
    /// True when the null hypothesis survives at significance `alpha`.
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Survival function of the Kolmogorov distribution, P(K > λ).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K ≤ λ) = √(2π)/λ · Σ_{k≥1} exp(−(2k−1)²π²/(8λ²))
        let pi2 = std::f64::consts::PI.powi(2);
        let s: f64 = (1..=50)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (-j * j * pi2 / (8.0 * lambda * lambda)).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        // 2 Σ_{k≥1} (−1)^(k−1) exp(−2k²λ²)
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// One-sample KS test of `samples` against `cdf`.
///
/// The p-value uses the asymptotic distribution with Stephens' small-sample
/// correction λ = (√n + 0.12 + 0.11/√n)·D.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> GofOutcome {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    GofOutcome {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        dof: None,
    }
}

/// Pearson chi-square over pre-binned counts.
///
/// `probs` are the null-hypothesis bin probabilities and should sum to 1.
/// Adjacent bins are merged left to right until each has expected count ≥ 5.
pub fn chi_square_test(observed: &[u64], probs: &[f64]) -> GofOutcome {
    assert_eq!(observed.len(), probs.len(), "bin count mismatch");
    let total: u64 = observed.iter().sum();
    let n = total as f64;

    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        obs_acc += o as f64;
        exp_acc += p * n;
        if exp_acc >= 5.0 {
            pooled.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if exp_acc > 0.0 || obs_acc > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += obs_acc;
                last.1 += exp_acc;
            }
            None => pooled.push((obs_acc, exp_acc)),
        }
    }

    let statistic: f64 = pooled.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = pooled.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).expect("positive dof");
        dist.sf(statistic)
    };
    GofOutcome {
        statistic,
        p_value,
        dof: Some(dof),
    }
}

/// Chi-square test of integer `samples` against `pmf`.
///
/// Bins are every integer in `lo..=hi` plus the two open tails, whose
/// probabilities are one minus the interior mass split by the pmf's own
/// tail sums over `tail_span` further integers.
pub fn chi_square_discrete(samples: &[i64], pmf: impl Fn(i64) -> f64, lo: i64, hi: i64, tail_span: i64) -> GofOutcome {
    assert!(lo <= hi);
    let width = (hi - lo + 1) as usize;
    let mut observed = vec![0u64; width + 2];
    for &s in samples {
        let bin = if s < lo {
            0
        } else if s > hi {
            width + 1
        } else {
            (s - lo) as usize + 1
        };
        observed[bin] += 1;
    }
    let mut probs = Vec::with_capacity(width + 2);
    probs.push((lo - tail_span..lo).map(&pmf).sum());
    probs.extend((lo..=hi).map(&pmf));
    probs.push((hi + 1..=hi + tail_span).map(&pmf).sum());
    chi_square_test(&observed, &probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;
    use rand::Rng;

    #[test]
    fn kolmogorov_sf_known_points() {
        // standard table values
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-3);
        assert!((kolmogorov_sf(0.8276) - 0.5).abs() < 2e-3);
        // both branches agree where they meet
        assert!((kolmogorov_sf(1.1799) - kolmogorov_sf(1.1801)).abs() < 1e-3);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shifted() {
        let mut rng = RngSeed(1).rng();
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let cdf = |x: f64| x.clamp(0.0, 1.0);
        assert!(ks_test(&xs, cdf).passes(0.001));
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.98).collect();
        assert!(!ks_test(&shifted, cdf).passes(0.001));
    }

    #[test]
    fn chi_square_fair_die() {
        let mut rng = RngSeed(2).rng();
        let mut counts = [0u64; 6];
        for _ in 0..60_000 {
            counts[rng.random_range(0..6)] += 1;
        }
        let out = chi_square_test(&counts, &[1.0 / 6.0; 6]);
        assert_eq!(out.dof, Some(5));
        assert!(out.passes(0.001));
        let loaded = [12_000, 10_000, 10_000, 10_000, 10_000, 8_000];
        assert!(!chi_square_test(&loaded, &[1.0 / 6.0; 6]).passes(0.001));
    }

    #[test]
    fn sparse_bins_are_pooled() {
        let out = chi_square_test(&[1, 1, 98], &[0.01, 0.01, 0.98]);
        assert_eq!(out.dof, Some(0));
    }
}
