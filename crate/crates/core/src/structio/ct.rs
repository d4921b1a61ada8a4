use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqio::{Alphabet, NucleotideSequence};

use super::PairTable;

/// A structure in 6-column connectivity-table form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtRecord {
    pub title: String,
    pub sequence: NucleotideSequence,
    pub pairs: PairTable,
    /// Column 6 when it differs from the running index.
    pub origin_coords: Option<Vec<i64>>,
    /// Set when the input contained crossing pairs.
    pub pseudoknotted: bool,
}

impl CtRecord {
    pub fn new(
        title: impl Into<String>,
        sequence: NucleotideSequence,
        pairs: PairTable,
        origin_coords: Option<Vec<i64>>,
    ) -> Result<Self> {
        if sequence.len() != pairs.len() {
            return Err(Error::invalid(format!(
                "sequence length {} differs from pair table length {}",
                sequence.len(),
                pairs.len()
            )));
        }
        if let Some(c) = &origin_coords {
            if c.len() != sequence.len() {
                return Err(Error::invalid("origin coordinate count differs from length"));
            }
        }
        let pseudoknotted = pairs.has_pseudoknot();
        Ok(Self {
            title: title.into(),
            sequence,
            pairs,
            origin_coords,
            pseudoknotted,
        })
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Original coordinate of 1-based position `pos` (the position itself
    /// when no origin column was recorded).
    pub fn origin(&self, pos: usize) -> i64 {
        match &self.origin_coords {
            Some(c) => c[pos - 1],
            None => pos as i64,
        }
    }
}

/// Parses a 6-column CT file holding one record. Lines are
/// `index base prev next partner original_index`.
pub fn parse_ct(text: &str) -> Result<CtRecord> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::format("ct", "empty input"))?;
    let mut head = header.splitn(2, char::is_whitespace);
    let n: usize = head
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse("ct", hline, "header must start with the residue count"))?;
    let title = head.next().unwrap_or("").trim().to_string();

    let mut bases = Vec::with_capacity(n);
    let mut partner = Vec::with_capacity(n);
    let mut origin = Vec::with_capacity(n);
    let mut row_line = Vec::with_capacity(n);
    for (lineno, line) in lines {
        if bases.len() == n {
            return Err(Error::parse("ct", lineno, format!("more than {n} residue rows")));
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(Error::parse(
                "ct",
                lineno,
                format!("expected 6 columns, found {}", cols.len()),
            ));
        }
        let num = |s: &str, what: &str| -> Result<i64> {
            s.parse()
                .map_err(|_| Error::parse("ct", lineno, format!("bad {what} '{s}'")))
        };
        let index = num(cols[0], "index")?;
        if index != bases.len() as i64 + 1 {
            return Err(Error::parse(
                "ct",
                lineno,
                format!("index {index} out of sequence (expected {})", bases.len() + 1),
            ));
        }
        let p = num(cols[4], "partner")?;
        if p < 0 || p as usize > n {
            return Err(Error::parse("ct", lineno, format!("partner {p} out of range")));
        }
        let base = match cols[1].as_bytes() {
            [b] => match b.to_ascii_uppercase() {
                b'T' => b'U',
                b @ (b'A' | b'C' | b'G' | b'U' | b'N') => b,
                b if b.is_ascii_alphabetic() => {
                    log::warn!("ct line {lineno}: modified base '{}' read as N", b as char);
                    b'N'
                }
                _ => return Err(Error::parse("ct", lineno, "bad base")),
            },
            _ => return Err(Error::parse("ct", lineno, "base must be one character")),
        };
        bases.push(base);
        partner.push(p as usize);
        origin.push(num(cols[5], "original index")?);
        row_line.push(lineno);
    }
    if bases.len() != n {
        return Err(Error::parse(
            "ct",
            hline,
            format!("header declares {n} residues, found {}", bases.len()),
        ));
    }
    for (idx, &j) in partner.iter().enumerate() {
        let i = idx + 1;
        if j == 0 {
            continue;
        }
        if j == i {
            return Err(Error::parse("ct", row_line[idx], "residue paired with itself"));
        }
        if partner[j - 1] != i {
            return Err(Error::parse("ct", row_line[j - 1], "asymmetric pair"));
        }
    }
    let pairs = PairTable::from_partners(partner)?;
    let sequence = NucleotideSequence::new(title.clone(), &bases, Alphabet::Rna)?;
    let is_identity = origin.iter().enumerate().all(|(i, &o)| o == i as i64 + 1);
    CtRecord::new(title, sequence, pairs, (!is_identity).then_some(origin))
}

/// Single-space separated CT text with a trailing newline.
pub fn write_ct(record: &CtRecord) -> String {
    let n = record.len();
    let mut out = String::new();
    if record.title.is_empty() {
        let _ = writeln!(out, "{n}");
    } else {
        let _ = writeln!(out, "{n} {}", record.title);
    }
    for (idx, &b) in record.sequence.residues().iter().enumerate() {
        let i = idx + 1;
        let next = if i == n { 0 } else { i + 1 };
        let p = record.pairs.partner(i).unwrap_or(0);
        let _ = writeln!(out, "{i} {} {} {next} {p} {}", b as char, i - 1, record.origin(i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const STUB: &str = "4 t\n1 G 0 2 4 1\n2 G 1 3 3 2\n3 C 2 4 2 3\n4 C 3 0 1 4\n";

    #[test]
    fn minimal_table() {
        let r = parse_ct(STUB).unwrap();
        assert_eq!(r.pairs.partners(), &[4, 3, 2, 1]);
        assert_eq!(r.title, "t");
        assert_eq!(r.sequence.as_str(), "GGCC");
        assert!(r.origin_coords.is_none());
        assert_eq!(write_ct(&r), STUB);
    }

    #[test]
    fn asymmetric_pair_reports_line() {
        let text = "4 t\n1 G 0 2 3 1\n2 G 1 3 0 2\n3 C 2 4 0 3\n4 C 3 0 0 4\n";
        let err = parse_ct(text).unwrap_err().to_string();
        assert!(err.contains("asymmetric pair at line 4"), "{err}");
    }

    #[test]
    fn structural_errors() {
        // count mismatch
        assert!(parse_ct("3 t\n1 G 0 2 0 1\n2 G 1 0 0 2\n").is_err());
        // index gap
        assert!(parse_ct("2 t\n1 G 0 2 0 1\n3 G 1 0 0 2\n").is_err());
        // wrong column count
        assert!(parse_ct("1 t\n1 G 0 0 0\n").is_err());
        assert!(parse_ct("").is_err());
    }

    #[test]
    fn pseudoknot_is_flagged_not_rejected() {
        let text = "4 k\n1 G 0 2 3 1\n2 G 1 3 4 2\n3 C 2 4 1 3\n4 C 3 0 2 4\n";
        let r = parse_ct(text).unwrap();
        assert!(r.pseudoknotted);
    }

    #[test]
    fn default_origin_column() {
        let seq = NucleotideSequence::new("x", b"ACGU", Alphabet::Rna).unwrap();
        let r = CtRecord::new("x", seq, PairTable::unpaired(4), None).unwrap();
        for line in write_ct(&r).lines().skip(1) {
            let cols: Vec<&str> = line.split(' ').collect();
            assert_eq!(cols[0], cols[5]);
        }
    }
}
