use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Secondary structure as a partner table. Positions are 1-based; a partner
/// of 0 means unpaired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTable {
    partner: Vec<usize>,
}

impl PairTable {
    pub fn unpaired(len: usize) -> Self {
        Self { partner: vec![0; len] }
    }

    /// Builds a table from `(i, j)` pairs (1-based, either order). Fails on
    /// out-of-range positions, self pairs, or a position used twice.
    pub fn from_pairs(len: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut t = Self::unpaired(len);
        for &(i, j) in pairs {
            if i == 0 || j == 0 || i > len || j > len {
                return Err(Error::invalid(format!("pair ({i},{j}) outside 1..={len}")));
            }
            if i == j {
                return Err(Error::invalid(format!("self pair at {i}")));
            }
            if t.partner[i - 1] != 0 || t.partner[j - 1] != 0 {
                return Err(Error::invalid(format!("position reused by pair ({i},{j})")));
            }
            t.partner[i - 1] = j;
            t.partner[j - 1] = i;
        }
        Ok(t)
    }

    /// Builds a table from a raw partner vector, checking symmetry.
    pub fn from_partners(partner: Vec<usize>) -> Result<Self> {
        let n = partner.len();
        for (idx, &j) in partner.iter().enumerate() {
            let i = idx + 1;
            if j == 0 {
                continue;
            }
            if j > n || j == i || partner[j - 1] != i {
                return Err(Error::invalid(format!("asymmetric pair at position {i}")));
            }
        }
        Ok(Self { partner })
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    /// Partner of 1-based position `pos`, if paired.
    pub fn partner(&self, pos: usize) -> Option<usize> {
        match self.partner.get(pos.wrapping_sub(1)) {
            Some(&0) | None => None,
            Some(&j) => Some(j),
        }
    }

    pub fn is_paired(&self, pos: usize) -> bool {
        self.partner(pos).is_some()
    }

    /// Raw 1-based partner vector (index 0 holds position 1).
    pub fn partners(&self) -> &[usize] {
        &self.partner
    }

    /// All pairs `(i, j)` with `i < j`, sorted by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(idx, &j)| (j > idx + 1).then_some((idx + 1, j)))
            .collect()
    }

    pub fn pair_count(&self) -> usize {
        self.partner.iter().enumerate().filter(|&(idx, &j)| j > idx + 1).count()
    }

    /// True when some two pairs cross (`i < k < j < l`).
    pub fn has_pseudoknot(&self) -> bool {
        let mut stack: Vec<usize> = Vec::new();
        for (idx, &j) in self.partner.iter().enumerate() {
            let i = idx + 1;
            if j == 0 {
                continue;
            }
            if j > i {
                stack.push(j);
            } else if stack.pop() != Some(i) {
                return true;
            }
        }
        false
    }

    /// Largest nested subset, chosen greedily: pairs are kept in order of
    /// their 5' position unless they cross an already kept pair.
    pub fn nested_subset(&self) -> PairTable {
        let mut kept: Vec<(usize, usize)> = Vec::new();
        for (i, j) in self.pairs() {
            let crosses = kept
                .iter()
                .any(|&(k, l)| (k < i && i < l && l < j) || (i < k && k < j && j < l));
            if !crosses {
                kept.push((i, j));
            }
        }
        PairTable::from_pairs(self.len(), &kept).expect("subset of a valid table")
    }

    /// `(`/`)`/`.` rendering. Crossing pairs are rendered like nested ones,
    /// so only nested tables round-trip.
    pub fn to_dot_bracket(&self) -> String {
        self.partner
            .iter()
            .enumerate()
            .map(|(idx, &j)| match j {
                0 => '.',
                j if j > idx + 1 => '(',
                _ => ')',
            })
            .collect()
    }
}
