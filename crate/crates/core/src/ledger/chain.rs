use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Block, BlockHash, LedgerError, Result, GENESIS_MINER};

/// Hash-linked sequence of blocks, genesis first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    blocks: Vec<Block>,
}

impl Default for Chain {
    fn default() -> Self {
        Self::new()
    }
}

impl Chain {
    /// A chain holding only the genesis block.
    pub fn new() -> Self {
        Self {
            blocks: vec![Block::genesis()],
        }
    }

    /// Wraps blocks without checking them; see [`validate_chain`].
    pub fn from_blocks(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Direct access for tamper experiments.
    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("chain always holds genesis")
    }
}

/// Why an honest node rejects a candidate block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    StaleBlock { expected_prev: BlockHash, found: BlockHash },
    HeightMismatch { expected: u64, found: u64 },
    HashMismatch,
    NonCanonicalOrder,
    InvalidTransaction(String),
    EmptyBlock,
    NoMajority { approvals: usize, voters: usize },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::StaleBlock { expected_prev, found } => {
                write!(
                    f,
                    "stale block: prev_hash {found} does not reference tip {expected_prev}"
                )
            }
            Rejection::HeightMismatch { expected, found } => {
                write!(f, "height {found} conflicts with expected {expected}")
            }
            Rejection::HashMismatch => f.write_str("block hash does not match contents"),
            Rejection::NonCanonicalOrder => f.write_str("transactions not in canonical order"),
            Rejection::InvalidTransaction(m) => write!(f, "invalid transaction: {m}"),
            Rejection::EmptyBlock => f.write_str("block carries no transactions"),
            Rejection::NoMajority { approvals, voters } => {
                write!(f, "{approvals} of {voters} approvals is not a strict majority")
            }
        }
    }
}

/// Outcome of a verification round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub votes: BTreeMap<String, bool>,
    pub accepted: bool,
    /// The honest nodes' reason for rejecting, if any.
    pub rejection: Option<Rejection>,
}

/// The checks one honest node performs on a candidate block.
fn inspect(block: &Block, chain: &Chain) -> Result<(), Rejection> {
    let tip = chain.tip();
    if block.prev_hash != tip.block_hash {
        return Err(Rejection::StaleBlock {
            expected_prev: tip.block_hash,
            found: block.prev_hash,
        });
    }
    if block.height != tip.height + 1 {
        return Err(Rejection::HeightMismatch {
            expected: tip.height + 1,
            found: block.height,
        });
    }
    if block.txs.is_empty() {
        return Err(Rejection::EmptyBlock);
    }
    for tx in &block.txs {
        tx.check().map_err(|e| Rejection::InvalidTransaction(e.to_string()))?;
    }
    if !block.txs.windows(2).all(|w| w[0].key() < w[1].key()) {
        return Err(Rejection::NonCanonicalOrder);
    }
    if block.compute_hash() != block.block_hash {
        return Err(Rejection::HashMismatch);
    }
    Ok(())
}

/// Every node in `nodes` recomputes the hash and linkage and votes.
/// Accepted on a strict majority of approvals.
pub fn verify_block(block: &Block, nodes: &[String], chain: &Chain) -> Verdict {
    let honest = inspect(block, chain);
    let approve = honest.is_ok();
    let votes = nodes.iter().map(|n| (n.clone(), approve)).collect();
    finish(votes, honest.err())
}

/// Like [`verify_block`] but each node's vote comes from `vote`, which is
/// handed the honest verdict. Lets tests model faulty or colluding nodes.
pub fn verify_block_with<F>(block: &Block, nodes: &[String], chain: &Chain, mut vote: F) -> Verdict
where
    F: FnMut(&str, bool) -> bool,
{
    let honest = inspect(block, chain);
    let approve = honest.is_ok();
    let votes = nodes.iter().map(|n| (n.clone(), vote(n, approve))).collect();
    finish(votes, honest.err())
}

fn finish(votes: BTreeMap<String, bool>, rejection: Option<Rejection>) -> Verdict {
    let approvals = votes.values().filter(|&&v| v).count();
    let accepted = approvals * 2 > votes.len();
    let rejection = match rejection {
        Some(r) => Some(r),
        None if !accepted => Some(Rejection::NoMajority {
            approvals,
            voters: votes.len(),
        }),
        None => None,
    };
    Verdict {
        votes,
        accepted,
        rejection,
    }
}

/// Appends a block whose `votes` carry a strict majority of approvals and
/// which still links onto the current tip.
pub fn append_block(chain: &mut Chain, mut block: Block, verdict: &Verdict) -> Result<()> {
    if !verdict.accepted {
        let reason = verdict
            .rejection
            .as_ref()
            .map_or_else(|| "rejected".to_string(), ToString::to_string);
        return Err(LedgerError::NotVerified(reason));
    }
    inspect(&block, chain).map_err(|r| LedgerError::NotVerified(r.to_string()))?;
    block.votes = verdict.votes.clone();
    chain.blocks.push(block);
    Ok(())
}

/// First broken invariant of a chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Position in the chain, which equals the expected height.
    pub height: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub valid: bool,
    pub blocks: usize,
    pub first_violation: Option<Violation>,
}

/// Walks the chain from genesis and reports the first block that breaks a
/// height, linkage, genesis or hash invariant.
pub fn validate_chain(chain: &Chain) -> ChainReport {
    let violation = chain
        .blocks
        .iter()
        .enumerate()
        .find_map(|(i, block)| {
            check_at(chain, i, block).err().map(|reason| Violation {
                height: i as u64,
                reason,
            })
        })
        .or_else(|| {
            chain.blocks.is_empty().then(|| Violation {
                height: 0,
                reason: "missing genesis block".into(),
            })
        });
    ChainReport {
        valid: violation.is_none(),
        blocks: chain.blocks.len(),
        first_violation: violation,
    }
}

fn check_at(chain: &Chain, i: usize, block: &Block) -> std::result::Result<(), String> {
    if block.height != i as u64 {
        return Err(format!("height {} at position {i}", block.height));
    }
    if i == 0 {
        if block.prev_hash != BlockHash::ZERO {
            return Err("genesis prev_hash is not zero".into());
        }
        if !block.txs.is_empty() || block.miner_id != GENESIS_MINER {
            return Err("genesis must be empty and mined by `genesis`".into());
        }
    } else {
        let prev = &chain.blocks[i - 1];
        if block.prev_hash != prev.block_hash {
            return Err(format!("prev_hash does not match block {}", i - 1));
        }
        if !block.txs.windows(2).all(|w| w[0].key() < w[1].key()) {
            return Err("transactions not in canonical order".into());
        }
        if let Some(bad) = block.txs.iter().find_map(|tx| tx.check().err()) {
            return Err(bad.to_string());
        }
    }
    if block.compute_hash() != block.block_hash {
        return Err("block hash does not match contents".into());
    }
    Ok(())
}
