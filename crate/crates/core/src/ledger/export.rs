//! Chain export: JSON lines, one block per line.

use super::{Block, Chain, LedgerError, Result};

pub fn chain_to_jsonl(chain: &Chain) -> String {
    let mut out = String::new();
    for block in chain.blocks() {
        out.push_str(&serde_json::to_string(block).expect("blocks serialize"));
        out.push('\n');
    }
    out
}

/// Parses an export. Structural problems are errors; invariant violations
/// are left for [`super::validate_chain`].
pub fn chain_from_jsonl(text: &str) -> Result<Chain> {
    if !text.is_empty() && !text.ends_with('\n') {
        return Err(LedgerError::Parse {
            line: text.lines().count(),
            message: "truncated export: last line is not terminated".into(),
        });
    }
    let mut blocks = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let block: Block = serde_json::from_str(line).map_err(|e| LedgerError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        blocks.push(block);
    }
    if blocks.is_empty() {
        return Err(LedgerError::Parse {
            line: 0,
            message: "empty export".into(),
        });
    }
    Ok(Chain::from_blocks(blocks))
}
