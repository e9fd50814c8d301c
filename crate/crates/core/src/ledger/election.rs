use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LedgerError, Result};

/// Deposited stake per node. Static for a run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StakeTable {
    entries: BTreeMap<String, u64>,
}

impl StakeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node_id: impl Into<String>, stake: u64) {
        self.entries.insert(node_id.into(), stake);
    }

    pub fn get(&self, node_id: &str) -> Option<u64> {
        self.entries.get(node_id).copied()
    }

    pub fn total(&self) -> u128 {
        self.entries.values().map(|&s| s as u128).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for StakeTable {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

/// Elects a miner with probability stake / total stake.
///
/// Draws one integer uniformly from [0, total) and walks the table in node id
/// order.
pub fn select_miner<R: Rng + ?Sized>(stakes: &StakeTable, rng: &mut R) -> Result<String> {
    let total = stakes.total();
    if total == 0 {
        return Err(LedgerError::NoStake);
    }
    let mut ticket = rng.random_range(0..total);
    for (node, stake) in stakes.iter() {
        let stake = stake as u128;
        if ticket < stake {
            return Ok(node.to_string());
        }
        ticket -= stake;
    }
    unreachable!("ticket below total stake always lands on a node")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    fn frequencies(stakes: &StakeTable, trials: usize, seed: u64) -> BTreeMap<String, f64> {
        let mut rng = RngSeed(seed).rng();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for _ in 0..trials {
            *counts.entry(select_miner(stakes, &mut rng).unwrap()).or_default() += 1;
        }
        counts.into_iter().map(|(k, c)| (k, c as f64 / trials as f64)).collect()
    }

    #[test]
    fn single_staker_always_wins() {
        let stakes: StakeTable = [("solo", 5)].into_iter().collect();
        let mut rng = RngSeed(1).rng();
        for _ in 0..100 {
            assert_eq!(select_miner(&stakes, &mut rng).unwrap(), "solo");
        }
    }

    #[test]
    fn zero_stake_nodes_never_win() {
        let stakes: StakeTable = [("a", 0), ("b", 3)].into_iter().collect();
        let f = frequencies(&stakes, 1000, 2);
        assert_eq!(f.get("a"), None);
    }

    #[test]
    fn even_split() {
        let stakes: StakeTable = [("a", 50), ("b", 50)].into_iter().collect();
        let f = frequencies(&stakes, 100_000, 3);
        assert!((f["a"] - 0.5).abs() <= 0.005, "{f:?}");
        assert!((f["b"] - 0.5).abs() <= 0.005, "{f:?}");
    }

    #[test]
    fn minority_staker_rarely_wins() {
        let stakes: StakeTable = [("a", 99), ("b", 1)].into_iter().collect();
        let f = frequencies(&stakes, 100_000, 4);
        assert!((f["b"] - 0.01).abs() <= 0.003, "{f:?}");
    }

    #[test]
    fn empty_or_zero_table_errors() {
        let mut rng = RngSeed(1).rng();
        assert_eq!(select_miner(&StakeTable::new(), &mut rng), Err(LedgerError::NoStake));
        let zeros: StakeTable = [("a", 0), ("b", 0)].into_iter().collect();
        assert_eq!(select_miner(&zeros, &mut rng), Err(LedgerError::NoStake));
    }
}
