use std::collections::BTreeMap;

use super::{Block, Chain, LedgerError, Result, Transaction};

/// Public buffer of pending transactions, kept in canonical order
/// (meter id, timestamp, nonce).
#[derive(Debug, Clone, Default)]
pub struct MiningPool {
    txs: BTreeMap<(String, u16, u64), Transaction>,
}

impl MiningPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `tx`; returns the new pool size.
    pub fn submit(&mut self, tx: Transaction) -> Result<usize> {
        tx.check()?;
        let key = (tx.meter_id.clone(), tx.timestamp_min, tx.nonce);
        if self.txs.contains_key(&key) {
            return Err(LedgerError::DuplicateTransaction {
                meter_id: tx.meter_id,
                timestamp_min: tx.timestamp_min,
                nonce: tx.nonce,
            });
        }
        self.txs.insert(key, tx);
        Ok(self.txs.len())
    }

    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    /// Pending transactions in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &Transaction> {
        self.txs.values()
    }

    /// Drops every transaction included in an accepted `block`.
    pub fn remove_included(&mut self, block: &Block) {
        for tx in &block.txs {
            self.txs.remove(&(tx.meter_id.clone(), tx.timestamp_min, tx.nonce));
        }
    }
}

/// Packs the whole pool into a block on top of `chain`'s tip.
///
/// The pool is left untouched; drain it with [`MiningPool::remove_included`]
/// once the block is accepted.
pub fn mine_block(pool: &MiningPool, miner_id: &str, chain: &Chain) -> Result<Block> {
    if pool.is_empty() {
        return Err(LedgerError::NothingToMine);
    }
    if miner_id.is_empty() || miner_id.len() > u16::MAX as usize {
        return Err(LedgerError::InvalidTransaction(
            "miner id must be 1..=65535 bytes".into(),
        ));
    }
    let tip = chain.tip();
    Ok(Block::sealed(
        tip.height + 1,
        tip.block_hash,
        pool.iter().cloned().collect(),
        miner_id.to_string(),
    ))
}
