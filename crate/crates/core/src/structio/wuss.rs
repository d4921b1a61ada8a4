use crate::error::{Error, Result};

use super::PairTable;

const OPEN: &[u8] = b"(<[{";
const CLOSE: &[u8] = b")>]}";
const UNPAIRED: &[u8] = b".,_:-~";

/// Parses the nested subset of WUSS notation. Each bracket family is matched
/// with its own stack and the families are merged; pairs from different
/// families must not cross.
pub fn parse_wuss(ss: &str) -> Result<PairTable> {
    let mut stacks: [Vec<usize>; 4] = Default::default();
    let mut pairs = Vec::new();
    for (idx, b) in ss.bytes().enumerate() {
        let pos = idx + 1;
        if let Some(f) = OPEN.iter().position(|&c| c == b) {
            stacks[f].push(pos);
        } else if let Some(f) = CLOSE.iter().position(|&c| c == b) {
            let Some(i) = stacks[f].pop() else {
                return Err(Error::format(
                    "wuss",
                    format!("unbalanced '{}' at column {pos}", b as char),
                ));
            };
            pairs.push((i, pos));
        } else if !UNPAIRED.contains(&b) {
            return Err(Error::format(
                "wuss",
                format!("unsupported symbol '{}' at column {pos}", b as char),
            ));
        }
    }
    for (f, s) in stacks.iter().enumerate() {
        if let Some(&i) = s.last() {
            return Err(Error::format(
                "wuss",
                format!("unbalanced '{}' at column {i}", OPEN[f] as char),
            ));
        }
    }
    let table = PairTable::from_pairs(ss.len(), &pairs)?;
    if table.has_pseudoknot() {
        return Err(Error::format("wuss", "crossing pairs between bracket families"));
    }
    Ok(table)
}
