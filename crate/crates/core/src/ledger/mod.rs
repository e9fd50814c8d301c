//! In-process proof-of-stake ledger.
//!
//! Meters submit protected readings to a public mining pool. Each round a
//! miner is elected with probability proportional to its stake, packs the
//! whole pool into a block, and every node re-derives the block hash and
//! linkage before voting. A strict majority of approvals appends the block.
//!
//! Block hashes are SHA-256 over this big-endian encoding:
//!
//! ```text
//! u64 height ‖ [u8; 32] prev_hash ‖ u32 tx_count ‖
//!   tx_count × ( u16 len ‖ meter_id ‖ u16 timestamp_min ‖ i64 protected_mwh ‖ u64 nonce ) ‖
//! u16 len ‖ miner_id
//! ```
//!
//! Votes are not covered by the hash.

mod block;
mod chain;
mod election;
mod export;
mod pool;
mod sim;

use thiserror::Error;

pub use block::{wh_to_mwh, Block, BlockHash, Transaction, GENESIS_MINER};
pub use chain::{
    append_block, validate_chain, verify_block, verify_block_with, Chain, ChainReport, Rejection, Verdict, Violation,
};
pub use election::{select_miner, StakeTable};
pub use export::{chain_from_jsonl, chain_to_jsonl};
pub use pool::{mine_block, MiningPool};
pub use sim::{Ledger, RoundOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    #[error("duplicate transaction ({meter_id}, {timestamp_min}, nonce {nonce})")]
    DuplicateTransaction {
        meter_id: String,
        timestamp_min: u16,
        nonce: u64,
    },
    #[error("invalid transaction: {0}")]
    InvalidTransaction(String),
    #[error("no stake: election needs at least one node with positive stake")]
    NoStake,
    #[error("nothing to mine: pool is empty")]
    NothingToMine,
    #[error("block not verified: {0}")]
    NotVerified(String),
    #[error("chain export line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = LedgerError> = std::result::Result<T, E>;
