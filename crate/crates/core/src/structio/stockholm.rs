use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{parse_wuss, PairTable};

/// Symbols treated as gaps in sequence rows.
pub const GAP_SYMBOLS: &[u8] = b"-._~";

pub fn is_gap(b: u8) -> bool {
    GAP_SYMBOLS.contains(&b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedRow {
    pub id: String,
    /// Aligned residues, uppercased, gaps kept.
    pub residues: Vec<u8>,
}

impl AlignedRow {
    /// Residues with every gap symbol removed.
    pub fn ungapped(&self) -> Vec<u8> {
        self.residues.iter().copied().filter(|&b| !is_gap(b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StockholmAlignment {
    /// First `#=GF ID` value, if any.
    pub name: Option<String>,
    pub rows: Vec<AlignedRow>,
    pub ss_cons: String,
}

impl StockholmAlignment {
    pub fn column_count(&self) -> usize {
        self.ss_cons.len()
    }

    pub fn row(&self, id: &str) -> Option<&AlignedRow> {
        self.rows.iter().find(|r| r.id == id)
    }

    /// Columns (0-based) where fewer than half of the rows have a gap.
    pub fn consensus_columns(&self) -> Vec<usize> {
        let n = self.rows.len();
        (0..self.column_count())
            .filter(|&c| {
                let gaps = self.rows.iter().filter(|r| is_gap(r.residues[c])).count();
                2 * gaps < n
            })
            .collect()
    }

    /// `SS_cons` restricted to the consensus columns.
    pub fn projected_ss_cons(&self) -> String {
        let ss = self.ss_cons.as_bytes();
        self.consensus_columns().into_iter().map(|c| ss[c] as char).collect()
    }

    /// Nested pair table over consensus columns; errors when the projected
    /// structure does not balance.
    pub fn consensus_structure(&self) -> Result<PairTable> {
        parse_wuss(&self.projected_ss_cons())
    }
}

/// Parses a single Stockholm 1.0 alignment. Interleaved blocks are joined by
/// sequence id; `#=GC SS_cons` lines are joined the same way. Other markup is
/// ignored.
pub fn parse_stockholm(text: &str) -> Result<StockholmAlignment> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    match lines.find(|(_, l)| !l.trim().is_empty()) {
        Some((_, l)) if l.trim().starts_with("# STOCKHOLM 1.") => {}
        Some((n, _)) => return Err(Error::parse("stockholm", n, "missing '# STOCKHOLM 1.0' header")),
        None => return Err(Error::format("stockholm", "empty input")),
    }

    let mut name = None;
    let mut rows: Vec<AlignedRow> = Vec::new();
    let mut ss_cons: Option<String> = None;
    // ids fixed once the first block is complete
    let mut first_block_done = false;
    let mut in_block = false;
    let mut terminated = false;

    for (lineno, line) in lines {
        let trimmed = line.trim();
        if trimmed == "//" {
            terminated = true;
            break;
        }
        if trimmed.is_empty() {
            if in_block {
                first_block_done = true;
                in_block = false;
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("#=GF") {
            let mut it = rest.split_whitespace();
            if it.next() == Some("ID") && name.is_none() {
                name = Some(it.collect::<Vec<_>>().join(" "));
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("#=GC") {
            let mut it = rest.split_whitespace();
            if it.next() == Some("SS_cons") {
                let ann = it.next().unwrap_or("");
                if it.next().is_some() {
                    return Err(Error::parse("stockholm", lineno, "whitespace inside SS_cons"));
                }
                ss_cons.get_or_insert_with(String::new).push_str(ann);
                in_block = true;
            }
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (Some(id), Some(seq), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse("stockholm", lineno, "expected '<id> <aligned sequence>'"));
        };
        in_block = true;
        let residues = seq.bytes().map(|b| b.to_ascii_uppercase());
        match rows.iter_mut().find(|r| r.id == id) {
            Some(r) => r.residues.extend(residues),
            None if first_block_done => {
                return Err(Error::parse(
                    "stockholm",
                    lineno,
                    format!("ragged alignment: '{id}' absent from the first block"),
                ))
            }
            None => rows.push(AlignedRow {
                id: id.to_string(),
                residues: residues.collect(),
            }),
        }
    }
    if !terminated {
        return Err(Error::format("stockholm", "missing '//' terminator"));
    }
    if rows.is_empty() {
        return Err(Error::format("stockholm", "no sequences"));
    }
    let ss_cons = ss_cons.ok_or_else(|| Error::format("stockholm", "missing #=GC SS_cons"))?;
    let width = ss_cons.len();
    for r in &rows {
        if r.residues.len() != width {
            return Err(Error::format(
                "stockholm",
                format!(
                    "ragged alignment: '{}' has {} columns, SS_cons has {width}",
                    r.id,
                    r.residues.len()
                ),
            ));
        }
        if let Some(&b) = r.residues.iter().find(|&&b| !is_gap(b) && !b"ACGUTN".contains(&b)) {
            return Err(Error::format(
                "stockholm",
                format!("illegal residue '{}' in '{}'", b as char, r.id),
            ));
        }
    }
    Ok(StockholmAlignment { name, rows, ss_cons })
}
