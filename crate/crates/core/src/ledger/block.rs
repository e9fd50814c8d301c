use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::{LedgerError, Result};
use crate::metering::ProtectedReading;

pub const GENESIS_MINER: &str = "genesis";

/// SHA-256 digest.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BlockHash(pub [u8; 32]);

impl BlockHash {
    pub const ZERO: BlockHash = BlockHash([0; 32]);

    pub fn of(bytes: &[u8]) -> Self {
        Self(Sha256::digest(bytes).into())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for BlockHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockHash({})", self.to_hex())
    }
}

impl fmt::Display for BlockHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for BlockHash {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for BlockHash {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.len() != 64 || s.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(serde::de::Error::custom("expected 64 lowercase hex digits"));
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(&s, &mut out).map_err(serde::de::Error::custom)?;
        Ok(BlockHash(out))
    }
}

/// Wh → signed milliwatt-hours, rounding half to even.
pub fn wh_to_mwh(wh: f64) -> Result<i64> {
    let mwh = (wh * 1000.0).round_ties_even();
    // i64::MAX is not representable; stay strictly inside
    if !mwh.is_finite() || mwh.abs() >= 9.2e18 {
        return Err(LedgerError::InvalidTransaction(format!(
            "{wh} Wh does not fit in i64 mWh"
        )));
    }
    Ok(mwh as i64)
}

/// A protected reading as it appears on the ledger.
///
/// Carries no original reading and no error value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transaction {
    pub meter_id: String,
    pub timestamp_min: u16,
    pub protected_mwh: i64,
    pub nonce: u64,
}

impl Transaction {
    pub fn from_protected(reading: &ProtectedReading, nonce: u64) -> Result<Self> {
        let tx = Self {
            meter_id: reading.meter_id.clone(),
            timestamp_min: reading.timestamp_min,
            protected_mwh: wh_to_mwh(reading.protected_wh)?,
            nonce,
        };
        tx.check()?;
        Ok(tx)
    }

    pub fn protected_wh(&self) -> f64 {
        self.protected_mwh as f64 / 1000.0
    }

    /// Pool and canonical-order key.
    pub fn key(&self) -> (&str, u16, u64) {
        (&self.meter_id, self.timestamp_min, self.nonce)
    }

    pub fn check(&self) -> Result<()> {
        if self.meter_id.is_empty() || self.meter_id.len() > u16::MAX as usize {
            return Err(LedgerError::InvalidTransaction(
                "meter id must be 1..=65535 bytes".into(),
            ));
        }
        if !self.timestamp_min.is_multiple_of(10) || self.timestamp_min > 1430 {
            return Err(LedgerError::InvalidTransaction(format!(
                "timestamp {} is not a multiple of 10 in [0, 1430]",
                self.timestamp_min
            )));
        }
        Ok(())
    }

    fn encode_into(&self, out: &mut Vec<u8>) {
        put_str(out, &self.meter_id);
        out.extend_from_slice(&self.timestamp_min.to_be_bytes());
        out.extend_from_slice(&self.protected_mwh.to_be_bytes());
        out.extend_from_slice(&self.nonce.to_be_bytes());
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    let len = u16::try_from(s.len()).expect("identifier length checked on construction");
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(s.as_bytes());
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub prev_hash: BlockHash,
    pub txs: Vec<Transaction>,
    pub miner_id: String,
    /// node id → approve
    pub votes: BTreeMap<String, bool>,
    pub block_hash: BlockHash,
}

impl Block {
    pub fn genesis() -> Self {
        Self::sealed(0, BlockHash::ZERO, Vec::new(), GENESIS_MINER.to_string())
    }

    /// Builds a block and computes its hash. Votes start empty.
    pub fn sealed(height: u64, prev_hash: BlockHash, txs: Vec<Transaction>, miner_id: String) -> Self {
        let mut block = Self {
            height,
            prev_hash,
            txs,
            miner_id,
            votes: BTreeMap::new(),
            block_hash: BlockHash::ZERO,
        };
        block.block_hash = block.compute_hash();
        block
    }

    /// The bytes covered by `block_hash`.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(46 + self.txs.len() * 32 + self.miner_id.len());
        out.extend_from_slice(&self.height.to_be_bytes());
        out.extend_from_slice(&self.prev_hash.0);
        let count = u32::try_from(self.txs.len()).expect("fewer than 2^32 transactions");
        out.extend_from_slice(&count.to_be_bytes());
        for tx in &self.txs {
            tx.encode_into(&mut out);
        }
        put_str(&mut out, &self.miner_id);
        out
    }

    pub fn compute_hash(&self) -> BlockHash {
        BlockHash::of(&self.canonical_bytes())
    }

    pub fn approvals(&self) -> usize {
        self.votes.values().filter(|&&v| v).count()
    }
}
