//! Helices, multibranch loops and three-way junction extraction.
//!
//! A three-way junction is described by three subsequences. Each starts at
//! a base of one helix's penultimate pair and ends at a base of the next
//! helix's penultimate pair, so every subsequence is
//! `[penultimate, terminal, loop..., terminal, penultimate]` and at least four
//! bases long. Helices are numbered 5' to 3': H1 is the enclosing helix, H2
//! and H3 the two helices that branch off the loop.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structio::{CtRecord, PairTable};

/// One base pair with its residues; `five_prime < three_prime`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasePair {
    pub five_prime: usize,
    pub three_prime: usize,
    pub five_prime_base: char,
    pub three_prime_base: char,
}

impl BasePair {
    pub fn new(i: usize, j: usize, bi: u8, bj: u8) -> Self {
        let (i, j, bi, bj) = if i < j { (i, j, bi, bj) } else { (j, i, bj, bi) };
        Self {
            five_prime: i,
            three_prime: j,
            five_prime_base: bi.to_ascii_uppercase() as char,
            three_prime_base: bj.to_ascii_uppercase() as char,
        }
    }

    /// Watson-Crick or G-U wobble.
    pub fn is_canonical(&self) -> bool {
        is_canonical_pair(self.five_prime_base as u8, self.three_prime_base as u8)
    }

    /// Base at position `pos`, which must be one of the two pair positions.
    pub fn base_at(&self, pos: usize) -> char {
        if pos == self.five_prime {
            self.five_prime_base
        } else {
            debug_assert_eq!(pos, self.three_prime);
            self.three_prime_base
        }
    }
}

impl fmt::Display for BasePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}·{}{}",
            self.five_prime_base, self.five_prime, self.three_prime_base, self.three_prime
        )
    }
}

pub fn is_canonical_pair(a: u8, b: u8) -> bool {
    matches!(
        (a.to_ascii_uppercase(), b.to_ascii_uppercase()),
        (b'A', b'U') | (b'U', b'A') | (b'G', b'C') | (b'C', b'G') | (b'G', b'U') | (b'U', b'G')
    )
}

/// Maximal run of stacked pairs, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Helix {
    pub pairs: Vec<(usize, usize)>,
}

impl Helix {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Contiguous unpaired stretch. `start` is the first position, or the
/// position the loop would occupy when it is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopRegion {
    pub start: usize,
    pub bases: String,
}

impl LoopRegion {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn positions(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.bases.len()
    }
}

/// The two junction-side pairs of a helix arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JunctionArm {
    /// Pair closest to the junction loop.
    pub terminal: BasePair,
    /// The next stacked pair away from the loop.
    pub penultimate: BasePair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JunctionFamily {
    A,
    B,
    C,
}

impl fmt::Display for JunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JunctionFamily::A => "A",
            JunctionFamily::B => "B",
            JunctionFamily::C => "C",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeWayJunction {
    pub h1: JunctionArm,
    pub h2: JunctionArm,
    pub h3: JunctionArm,
    pub j12: LoopRegion,
    pub j23: LoopRegion,
    /// Loop between H3 and H1 (also written J13).
    pub j31: LoopRegion,
    pub s1id5: usize,
    pub s1id3: usize,
    pub s2id5: usize,
    pub s2id3: usize,
    pub s3id5: usize,
    pub s3id3: usize,
    pub strseq1: String,
    pub strseq2: String,
    pub strseq3: String,
    pub family: JunctionFamily,
}

impl ThreeWayJunction {
    pub fn coords(&self) -> [usize; 6] {
        [self.s1id5, self.s1id3, self.s2id5, self.s2id3, self.s3id5, self.s3id3]
    }

    /// Assembles a junction from its three arms. `h1` is the enclosing arm;
    /// `h2` and `h3` are the branches in 5' to 3' order.
    fn from_arms(h1: JunctionArm, h2: JunctionArm, h3: JunctionArm, residues: &[u8]) -> Self {
        let text = |a: usize, b: usize| -> String {
            residues[a - 1..b]
                .iter()
                .map(|&c| c.to_ascii_uppercase() as char)
                .collect()
        };
        let loop_between = |a: usize, b: usize| LoopRegion {
            start: a + 1,
            bases: if b > a + 1 { text(a + 1, b - 1) } else { String::new() },
        };
        let j12 = loop_between(h1.terminal.five_prime, h2.terminal.five_prime);
        let j23 = loop_between(h2.terminal.three_prime, h3.terminal.five_prime);
        let j31 = loop_between(h3.terminal.three_prime, h1.terminal.three_prime);
        let (s1id5, s1id3) = (h1.penultimate.five_prime, h2.penultimate.five_prime);
        let (s2id5, s2id3) = (h2.penultimate.three_prime, h3.penultimate.five_prime);
        let (s3id5, s3id3) = (h3.penultimate.three_prime, h1.penultimate.three_prime);
        let family = classify_family_counts(j31.len(), j23.len());
        Self {
            h1,
            h2,
            h3,
            j12,
            j23,
            j31,
            s1id5,
            s1id3,
            s2id5,
            s2id3,
            s3id5,
            s3id3,
            strseq1: text(s1id5, s1id3),
            strseq2: text(s2id5, s2id3),
            strseq3: text(s3id5, s3id3),
            family,
        }
    }
}

/// Every maximal stacked run of pairs, sorted by 5' start. A bulge or
/// internal loop of any size ends a helix.
pub fn find_helices(pt: &PairTable) -> Vec<Helix> {
    let mut helices = Vec::new();
    for (i, j) in pt.pairs() {
        let continues = i > 1 && pt.partner(i - 1) == Some(j + 1);
        if continues {
            continue;
        }
        let mut pairs = vec![(i, j)];
        let (mut a, mut b) = (i, j);
        while b > a + 2 && pt.partner(a + 1) == Some(b - 1) {
            a += 1;
            b -= 1;
            pairs.push((a, b));
        }
        helices.push(Helix { pairs });
    }
    helices
}

/// Result of classifying every closed multibranch loop in a structure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoopScan {
    pub junctions: Vec<ThreeWayJunction>,
    /// Closing pairs of loops with four or more helices.
    pub higher_order: Vec<(usize, usize)>,
    /// Closing pairs of three-way loops skipped because an arm has no
    /// penultimate pair.
    pub skipped: Vec<(usize, usize)>,
}

/// Helices emanating from the loop closed by `(i, j)`, as their
/// loop-side pairs in 5' order.
fn loop_children(pt: &PairTable, i: usize, j: usize) -> Vec<(usize, usize)> {
    let mut children = Vec::new();
    let mut k = i + 1;
    while k < j {
        match pt.partner(k) {
            Some(l) if l > k => {
                children.push((k, l));
                k = l + 1;
            }
            _ => k += 1,
        }
    }
    children
}

/// Walks every loop closed by a base pair. Crossing pairs are dropped first.
pub fn scan_loops(pt: &PairTable, residues: &[u8]) -> LoopScan {
    assert_eq!(pt.len(), residues.len(), "pair table and residues differ in length");
    let nested;
    let pt = if pt.has_pseudoknot() {
        nested = pt.nested_subset();
        &nested
    } else {
        pt
    };
    let pair = |a: usize, b: usize| BasePair::new(a, b, residues[a - 1], residues[b - 1]);
    let stacked = |a: usize, b: usize| a >= 1 && a < b && b <= pt.len() && pt.partner(a) == Some(b);

    let mut scan = LoopScan::default();
    for (i, j) in pt.pairs() {
        let children = loop_children(pt, i, j);
        match children.len() {
            0 | 1 => {}
            2 => {
                let (k1, l1) = children[0];
                let (k2, l2) = children[1];
                let ok = stacked(i - 1, j + 1) && stacked(k1 + 1, l1 - 1) && stacked(k2 + 1, l2 - 1);
                if !ok {
                    log::warn!("three-way loop closed by ({i},{j}) skipped: arm without a penultimate pair");
                    scan.skipped.push((i, j));
                    continue;
                }
                let h1 = JunctionArm {
                    terminal: pair(i, j),
                    penultimate: pair(i - 1, j + 1),
                };
                let h2 = JunctionArm {
                    terminal: pair(k1, l1),
                    penultimate: pair(k1 + 1, l1 - 1),
                };
                let h3 = JunctionArm {
                    terminal: pair(k2, l2),
                    penultimate: pair(k2 + 1, l2 - 1),
                };
                scan.junctions.push(ThreeWayJunction::from_arms(h1, h2, h3, residues));
            }
            _ => scan.higher_order.push((i, j)),
        }
    }
    scan
}

/// Three-way junctions of a nested structure, in 5' order of their
/// enclosing pair. The exterior loop never forms a junction.
pub fn find_three_way_junctions(pt: &PairTable, residues: &[u8]) -> Vec<ThreeWayJunction> {
    scan_loops(pt, residues).junctions
}

pub fn junctions_in_ct(ct: &CtRecord) -> LoopScan {
    scan_loops(&ct.pairs, ct.sequence.residues())
}

pub fn classify_family_counts(j31: usize, j23: usize) -> JunctionFamily {
    match j31.cmp(&j23) {
        std::cmp::Ordering::Less => JunctionFamily::A,
        std::cmp::Ordering::Equal => JunctionFamily::B,
        std::cmp::Ordering::Greater => JunctionFamily::C,
    }
}

pub fn classify_family(j: &ThreeWayJunction) -> JunctionFamily {
    classify_family_counts(j.j31.len(), j.j23.len())
}

/// Rebuilds a junction from the six subsequence coordinates
/// (S1ID5, S1ID3, S2ID5, S2ID3, S3ID5, S3ID3) and the three subsequences.
pub fn junction_from_dataset_row(coords: [usize; 6], strseqs: [&str; 3]) -> Result<ThreeWayJunction> {
    let [s1id5, s1id3, s2id5, s2id3, s3id5, s3id3] = coords;
    let spans = [(s1id5, s1id3), (s2id5, s2id3), (s3id5, s3id3)];
    for (k, (&(a, b), s)) in spans.iter().zip(strseqs.iter()).enumerate() {
        if s.len() < 4 {
            return Err(Error::invalid(format!(
                "StrSeq{} has {} bases; at least 4 required",
                k + 1,
                s.len()
            )));
        }
        if b < a || b - a + 1 != s.len() {
            return Err(Error::invalid(format!(
                "StrSeq{} length {} does not match coordinates {a}-{b}",
                k + 1,
                s.len()
            )));
        }
        if let Some(c) = s.chars().find(|c| !"ACGUTNacgutn".contains(*c)) {
            return Err(Error::invalid(format!("StrSeq{} has illegal base '{c}'", k + 1)));
        }
    }
    if !(s1id3 < s2id5 && s2id3 < s3id5) {
        return Err(Error::invalid("subsequences overlap or are out of order"));
    }

    // Sparse residue lookup covering only the subsequence positions.
    let base = |pos: usize| -> u8 {
        let (k, &(a, _)) = spans
            .iter()
            .enumerate()
            .find(|(_, &(a, b))| (a..=b).contains(&pos))
            .expect("position inside a subsequence");
        let b = strseqs[k].as_bytes()[pos - a].to_ascii_uppercase();
        if b == b'T' {
            b'U'
        } else {
            b
        }
    };
    let pair = |a: usize, b: usize| BasePair::new(a, b, base(a), base(b));
    let h1 = JunctionArm {
        terminal: pair(s1id5 + 1, s3id3 - 1),
        penultimate: pair(s1id5, s3id3),
    };
    let h2 = JunctionArm {
        terminal: pair(s1id3 - 1, s2id5 + 1),
        penultimate: pair(s1id3, s2id5),
    };
    let h3 = JunctionArm {
        terminal: pair(s2id3 - 1, s3id5 + 1),
        penultimate: pair(s2id3, s3id5),
    };
    let interior = |s: &str| -> String {
        s[2..s.len() - 2]
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'T' => 'U',
                c => c,
            })
            .collect()
    };
    let j12 = LoopRegion {
        start: s1id5 + 2,
        bases: interior(strseqs[0]),
    };
    let j23 = LoopRegion {
        start: s2id5 + 2,
        bases: interior(strseqs[1]),
    };
    let j31 = LoopRegion {
        start: s3id5 + 2,
        bases: interior(strseqs[2]),
    };
    let family = classify_family_counts(j31.len(), j23.len());
    let norm = |s: &str| interior(&format!("..{s}.."));
    Ok(ThreeWayJunction {
        h1,
        h2,
        h3,
        j12,
        j23,
        j31,
        s1id5,
        s1id3,
        s2id5,
        s2id3,
        s3id5,
        s3id3,
        strseq1: norm(strseqs[0]),
        strseq2: norm(strseqs[1]),
        strseq3: norm(strseqs[2]),
        family,
    })
}
