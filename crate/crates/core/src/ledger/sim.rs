use std::collections::BTreeMap;

use rand::Rng;

use super::{
    append_block, mine_block, select_miner, verify_block, Block, Chain, LedgerError, MiningPool, Result, StakeTable,
    Transaction, Verdict,
};
use crate::metering::ProtectedReading;

/// Result of one submit → elect → mine → verify → append round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    pub height: u64,
    pub miner_id: String,
    pub tx_count: usize,
    pub verdict: Verdict,
}

/// Single-writer ledger state: one pool, one chain, a static stake table.
///
/// Every staked node also verifies. Mining rewards are counted, not spent.
#[derive(Debug, Clone)]
pub struct Ledger {
    chain: Chain,
    pool: MiningPool,
    stakes: StakeTable,
    verifiers: Vec<String>,
    rewards: BTreeMap<String, u64>,
    next_nonce: u64,
}

impl Ledger {
    pub fn new(stakes: StakeTable) -> Result<Self> {
        if stakes.total() == 0 {
            return Err(LedgerError::NoStake);
        }
        let verifiers = stakes.nodes().map(str::to_string).collect();
        Ok(Self {
            chain: Chain::new(),
            pool: MiningPool::new(),
            stakes,
            verifiers,
            rewards: BTreeMap::new(),
            next_nonce: 0,
        })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn pool(&self) -> &MiningPool {
        &self.pool
    }

    pub fn stakes(&self) -> &StakeTable {
        &self.stakes
    }

    pub fn rewards(&self) -> &BTreeMap<String, u64> {
        &self.rewards
    }

    /// Converts a protected reading to a transaction with a fresh nonce and
    /// places it in the pool.
    pub fn submit(&mut self, reading: &ProtectedReading) -> Result<Transaction> {
        let tx = Transaction::from_protected(reading, self.next_nonce)?;
        self.pool.submit(tx.clone())?;
        self.next_nonce += 1;
        Ok(tx)
    }

    pub fn submit_transaction(&mut self, tx: Transaction) -> Result<usize> {
        self.pool.submit(tx)
    }

    /// Runs one mining round. On acceptance the block is appended, its
    /// transactions leave the pool and the miner's reward counter increments.
    pub fn run_round<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<RoundOutcome> {
        if self.pool.is_empty() {
            return Err(LedgerError::NothingToMine);
        }
        let miner_id = select_miner(&self.stakes, rng)?;
        let block = mine_block(&self.pool, &miner_id, &self.chain)?;
        let verdict = verify_block(&block, &self.verifiers, &self.chain);
        let outcome = RoundOutcome {
            height: block.height,
            miner_id: miner_id.clone(),
            tx_count: block.txs.len(),
            verdict: verdict.clone(),
        };
        if verdict.accepted {
            self.pool.remove_included(&block);
            append_block(&mut self.chain, block, &verdict)?;
            *self.rewards.entry(miner_id).or_default() += 1;
        }
        Ok(outcome)
    }

    pub fn into_chain(self) -> Chain {
        self.chain
    }

    pub fn last_block(&self) -> &Block {
        self.chain.tip()
    }
}
