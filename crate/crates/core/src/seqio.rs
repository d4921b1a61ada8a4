//! FASTA input, strand transformations and composition statistics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alphabet {
    Dna,
    Rna,
}

impl Alphabet {
    fn allows(self, b: u8) -> bool {
        match self {
            Alphabet::Dna => matches!(b, b'A' | b'C' | b'G' | b'T' | b'N'),
            Alphabet::Rna => matches!(b, b'A' | b'C' | b'G' | b'U' | b'N'),
        }
    }
}

/// An identified residue string. Residues are stored uppercase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NucleotideSequence {
    pub id: String,
    /// Full header line after `>` (may equal `id`).
    pub description: String,
    residues: Vec<u8>,
    alphabet: Alphabet,
}

impl NucleotideSequence {
    /// Builds a sequence, uppercasing `residues` and checking them against
    /// `alphabet`.
    pub fn new(id: impl Into<String>, residues: &[u8], alphabet: Alphabet) -> Result<Self> {
        let id = id.into();
        let residues: Vec<u8> = residues.iter().map(u8::to_ascii_uppercase).collect();
        if let Some(&bad) = residues.iter().find(|&&b| !alphabet.allows(b)) {
            return Err(Error::invalid(format!(
                "symbol '{}' not allowed in {:?} sequence '{}'",
                bad as char, alphabet, id
            )));
        }
        Ok(Self {
            description: id.clone(),
            id,
            residues,
            alphabet,
        })
    }

    /// Like [`NucleotideSequence::new`] but infers the alphabet: any `U`
    /// makes it RNA, otherwise DNA.
    pub fn infer(id: impl Into<String>, residues: &[u8]) -> Result<Self> {
        let alphabet = if residues.iter().any(|b| b.eq_ignore_ascii_case(&b'U')) {
            Alphabet::Rna
        } else {
            Alphabet::Dna
        };
        Self::new(id, residues, alphabet)
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn residues(&self) -> &[u8] {
        &self.residues
    }

    pub fn as_str(&self) -> &str {
        // residues are validated ASCII
        std::str::from_utf8(&self.residues).expect("ascii residues")
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// RNA view of the sequence: transcribed if DNA, cloned otherwise.
    pub fn to_rna(&self) -> NucleotideSequence {
        match self.alphabet {
            Alphabet::Rna => self.clone(),
            Alphabet::Dna => transcribe(self).expect("dna input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strand {
    Plus,
    Minus,
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strand::Plus => "+",
            Strand::Minus => "-",
        })
    }
}

/// Strand-aware 1-based interval. Minus-strand intervals are stored
/// descending (`start >= end`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenomicInterval {
    pub target_id: String,
    pub start: usize,
    pub end: usize,
    pub strand: Strand,
}

impl GenomicInterval {
    pub fn new(target_id: impl Into<String>, start: usize, end: usize, strand: Strand) -> Result<Self> {
        let ok = start >= 1
            && end >= 1
            && match strand {
                Strand::Plus => start <= end,
                Strand::Minus => start >= end,
            };
        if !ok {
            return Err(Error::invalid(format!(
                "interval {start}-{end} is not valid on the {strand} strand"
            )));
        }
        Ok(Self {
            target_id: target_id.into(),
            start,
            end,
            strand,
        })
    }

    pub fn len(&self) -> usize {
        self.start.abs_diff(self.end) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lowest and highest covered position regardless of strand.
    pub fn bounds(&self) -> (usize, usize) {
        (self.start.min(self.end), self.start.max(self.end))
    }
}

/// Parses FASTA text. Headers are split at the first whitespace into `id`
/// and the full description; sequence lines may wrap and are uppercased.
pub fn parse_fasta(text: &str) -> Result<Vec<NucleotideSequence>> {
    struct Pending {
        header: String,
        line: usize,
        residues: Vec<u8>,
    }

    fn finish(p: Pending) -> Result<NucleotideSequence> {
        let id = p.header.split_whitespace().next().unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::parse("fasta", p.line, "empty record identifier"));
        }
        let has_u = p.residues.contains(&b'U');
        let has_t = p.residues.contains(&b'T');
        if has_u && has_t {
            return Err(Error::parse("fasta", p.line, format!("record '{id}' mixes T and U")));
        }
        Ok(NucleotideSequence::infer(id, &p.residues)?.with_description(p.header.trim()))
    }

    if text.trim().is_empty() {
        return Err(Error::format("fasta", "empty input"));
    }
    let mut records = Vec::new();
    let mut current: Option<Pending> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            if let Some(p) = current.take() {
                records.push(finish(p)?);
            }
            current = Some(Pending {
                header: header.to_string(),
                line: lineno,
                residues: Vec::new(),
            });
            continue;
        }
        let Some(p) = current.as_mut() else {
            return Err(Error::parse("fasta", lineno, "sequence data before first header"));
        };
        for b in line.bytes().filter(|b| !b.is_ascii_whitespace()) {
            let b = b.to_ascii_uppercase();
            if !matches!(b, b'A' | b'C' | b'G' | b'T' | b'U' | b'N') {
                return Err(Error::parse("fasta", lineno, format!("illegal symbol '{}'", b as char)));
            }
            p.residues.push(b);
        }
    }
    if let Some(p) = current.take() {
        records.push(finish(p)?);
    }
    Ok(records)
}

/// Writes records as FASTA with 60-column lines.
pub fn write_fasta(records: &[NucleotideSequence]) -> String {
    let mut out = String::new();
    for r in records {
        out.push('>');
        out.push_str(if r.description.is_empty() {
            &r.id
        } else {
            &r.description
        });
        out.push('\n');
        for chunk in r.residues.chunks(60) {
            out.push_str(std::str::from_utf8(chunk).expect("ascii"));
            out.push('\n');
        }
    }
    out
}

fn complement(b: u8, alphabet: Alphabet) -> u8 {
    match (b, alphabet) {
        (b'A', Alphabet::Dna) => b'T',
        (b'A', Alphabet::Rna) => b'U',
        (b'T', _) | (b'U', _) => b'A',
        (b'C', _) => b'G',
        (b'G', _) => b'C',
        _ => b'N',
    }
}

pub fn reverse_complement(seq: &NucleotideSequence) -> NucleotideSequence {
    let residues = seq
        .residues
        .iter()
        .rev()
        .map(|&b| complement(b, seq.alphabet))
        .collect();
    NucleotideSequence {
        id: seq.id.clone(),
        description: seq.description.clone(),
        residues,
        alphabet: seq.alphabet,
    }
}

/// DNA to RNA (`T` becomes `U`).
pub fn transcribe(seq: &NucleotideSequence) -> Result<NucleotideSequence> {
    if seq.alphabet != Alphabet::Dna {
        return Err(Error::invalid(format!("sequence '{}' is already RNA", seq.id)));
    }
    let residues = seq.residues.iter().map(|&b| if b == b'T' { b'U' } else { b }).collect();
    Ok(NucleotideSequence {
        id: seq.id.clone(),
        description: seq.description.clone(),
        residues,
        alphabet: Alphabet::Rna,
    })
}

/// G+C content as an integer percentage, rounded half up. `N` counts in the
/// denominator only.
pub fn gc_percent(seq: &NucleotideSequence) -> Result<u32> {
    gc_percent_of(&seq.residues).ok_or_else(|| Error::invalid(format!("sequence '{}' is empty", seq.id)))
}

pub(crate) fn gc_percent_of(residues: &[u8]) -> Option<u32> {
    if residues.is_empty() {
        return None;
    }
    let gc = residues
        .iter()
        .filter(|b| matches!(b.to_ascii_uppercase(), b'G' | b'C'))
        .count();
    let n = residues.len();
    Some(((200 * gc + n) / (2 * n)) as u32)
}
