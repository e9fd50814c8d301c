use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DpError, Result};

/// Aggregate query whose sensitivity is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    Sum,
    Mean,
    Max,
}

impl Aggregate {
    /// Evaluates the query. The empty dataset aggregates to 0 for every query.
    pub fn eval(self, values: impl Iterator<Item = f64>) -> f64 {
        match self {
            Aggregate::Sum => values.sum(),
            Aggregate::Mean => {
                let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                if n == 0 {
                    0.0
                } else {
                    sum / n as f64
                }
            }
            Aggregate::Max => values.reduce(f64::max).unwrap_or(0.0),
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Sum => "sum",
            Aggregate::Mean => "mean",
            Aggregate::Max => "max",
        })
    }
}

impl FromStr for Aggregate {
    type Err = DpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Aggregate::Sum),
            "mean" => Ok(Aggregate::Mean),
            "max" => Ok(Aggregate::Max),
            other => Err(DpError::InvalidArgument(format!("unknown aggregate `{other}`"))),
        }
    }
}

/// Largest change in `query` caused by removing one record, over all `n`
/// single-record-removed neighbours of `dataset`.
pub fn compute_sensitivity(dataset: &[f64], query: Aggregate) -> Result<f64> {
    if dataset.is_empty() {
        return Err(DpError::InvalidArgument("sensitivity of an empty dataset".into()));
    }
    if let Some(bad) = dataset.iter().find(|v| !v.is_finite()) {
        return Err(DpError::InvalidArgument(format!("non-finite record {bad}")));
    }
    let full = query.eval(dataset.iter().copied());
    let worst = (0..dataset.len())
        .map(|skip| {
            let neighbour = dataset.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v);
            (full - query.eval(neighbour)).abs()
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(compute_sensitivity(&[5.0, 3.0, 7.0], Aggregate::Sum).unwrap(), 7.0);
        assert_eq!(compute_sensitivity(&[4.5, 4.5, 4.5], Aggregate::Sum).unwrap(), 4.5);
        assert_eq!(compute_sensitivity(&[10.0], Aggregate::Max).unwrap(), 10.0);
        // removing 7 drops the max to 5
        assert_eq!(compute_sensitivity(&[5.0, 3.0, 7.0], Aggregate::Max).unwrap(), 2.0);
        // mean 5; neighbours' means 5, 6, 4
        assert_eq!(compute_sensitivity(&[5.0, 3.0, 7.0], Aggregate::Mean).unwrap(), 1.0);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        assert!(matches!(
            compute_sensitivity(&[], Aggregate::Sum),
            Err(DpError::InvalidArgument(_))
        ));
    }
}
