//! Generators and slow reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use csminer::cmscan::{build_cm, BuildConfig, CmNode, CovarianceModel, GapPenalties};
use csminer::junction::JunctionFamily;
use csminer::seqio::{Alphabet, NucleotideSequence};
use csminer::structio::{parse_stockholm, CtRecord, PairTable};
use rand::Rng;

/// Random nested dot-bracket of exactly `len` characters built from stems
/// of 1 to 5 pairs, so multibranch loops and lone pairs both occur.
pub fn random_structure(rng: &mut impl Rng, len: usize) -> String {
    fn fill(rng: &mut impl Rng, budget: usize, out: &mut String) {
        let mut left = budget;
        while left > 0 {
            if left < 2 || rng.gen_bool(0.35) {
                out.push('.');
                left -= 1;
                continue;
            }
            let stem = rng.gen_range(1..=5).min(left / 2);
            let inner = rng.gen_range(0..=(left - 2 * stem).min(40));
            out.push_str(&"(".repeat(stem));
            fill(rng, inner, out);
            out.push_str(&")".repeat(stem));
            left -= 2 * stem + inner;
        }
    }
    let mut s = String::with_capacity(len);
    fill(rng, len, &mut s);
    s
}

pub fn random_rna(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| b"ACGU"[rng.gen_range(0..4)]).collect()
}

pub fn pairs_of(db: &str) -> Vec<(usize, usize)> {
    let mut stack = Vec::new();
    let mut pairs = Vec::new();
    for (k, c) in db.bytes().enumerate() {
        match c {
            b'(' => stack.push(k + 1),
            b')' => pairs.push((stack.pop().unwrap(), k + 1)),
            _ => {}
        }
    }
    pairs.sort();
    pairs
}

pub fn table(db: &str) -> PairTable {
    PairTable::from_pairs(db.len(), &pairs_of(db)).unwrap()
}

/// What the brute-force enumerator expects of one junction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedJunction {
    pub coords: [usize; 6],
    pub loops: (usize, usize, usize),
    pub family: JunctionFamily,
}

/// Every pair `(k, l)` directly enclosed by `(i, j)`: no third pair sits
/// between them. Quadratic in the number of pairs per loop, which is the
/// point: no walking, no partner lookups.
pub fn brute_force_junctions(db: &str) -> Vec<ExpectedJunction> {
    let pairs = pairs_of(db);
    let is_pair = |a: usize, b: usize| pairs.contains(&(a, b));
    let mut out = Vec::new();
    for &(i, j) in &pairs {
        let inside: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(k, l)| i < k && l < j).collect();
        let direct: Vec<(usize, usize)> = inside
            .iter()
            .copied()
            .filter(|&(k, l)| !inside.iter().any(|&(p, q)| p < k && l < q))
            .collect();
        if direct.len() != 2 {
            continue;
        }
        let ((k1, l1), (k2, l2)) = (direct[0], direct[1]);
        if i < 2 || !is_pair(i - 1, j + 1) || !is_pair(k1 + 1, l1 - 1) || !is_pair(k2 + 1, l2 - 1) {
            continue;
        }
        let loops = (k1 - i - 1, k2 - l1 - 1, j - l2 - 1);
        let family = if loops.2 < loops.1 {
            JunctionFamily::A
        } else if loops.2 == loops.1 {
            JunctionFamily::B
        } else {
            JunctionFamily::C
        };
        out.push(ExpectedJunction {
            coords: [i - 1, k1 + 1, l1 - 1, k2 + 1, l2 - 1, j + 1],
            loops,
            family,
        });
    }
    out
}

/// Best score of any derivation of any non-empty span of `x`, by direct
/// recursion over (node, start, end) with insertion runs enumerated by
/// length.
pub fn brute_force_cyk(cm: &CovarianceModel, x: &[u8]) -> f64 {
    let code: Vec<usize> = x.iter().map(|&b| csminer::cmscan::residue_code(b) as usize).collect();
    let mut bf = Brute {
        cm,
        x: &code,
        memo_s: HashMap::new(),
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..x.len() {
        for j in i + 1..=x.len() {
            best = best.max(bf.s(0, i, j));
        }
    }
    best
}

struct Brute<'a> {
    cm: &'a CovarianceModel,
    x: &'a [usize],
    memo_s: HashMap<(usize, usize, usize), f64>,
}

impl Brute<'_> {
    fn ins(&self, run: usize) -> f64 {
        if run == 0 {
            0.0
        } else {
            -self.cm.penalties.insert_open - (run - 1) as f64 * self.cm.penalties.insert_extend
        }
    }

    /// Node `v` derives `x[i..j)` after an optional run of inserts.
    fn s(&mut self, v: usize, i: usize, j: usize) -> f64 {
        if let Some(&s) = self.memo_s.get(&(v, i, j)) {
            return s;
        }
        let mut best = f64::NEG_INFINITY;
        for run in 0..=(j - i) {
            best = best.max(self.ins(run) + self.m(v, i + run, j));
        }
        self.memo_s.insert((v, i, j), best);
        best
    }

    /// Child of a pair, optionally followed by a run of inserts.
    fn r(&mut self, v: usize, i: usize, j: usize) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for run in 0..=(j - i) {
            best = best.max(self.s(v, i, j - run) + self.ins(run));
        }
        best
    }

    fn emit(&self, k: usize, table: &[f64; 4]) -> f64 {
        if k < 4 {
            table[k]
        } else {
            0.0
        }
    }

    fn m(&mut self, v: usize, i: usize, j: usize) -> f64 {
        let del = self.cm.penalties.delete;
        match self.cm.nodes[v].clone() {
            CmNode::End => {
                if i == j {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            CmNode::Left { emit, child, .. } => {
                let mut best = -del + self.s(child, i, j);
                if i < j {
                    best = best.max(self.emit(self.x[i], &emit) + self.s(child, i + 1, j));
                }
                best
            }
            CmNode::Pair { emit, child, .. } => {
                let mut best = -del + self.r(child, i, j);
                if j - i >= 2 {
                    let (a, b) = (self.x[i], self.x[j - 1]);
                    let e = if a < 4 && b < 4 { emit[a][b] } else { 0.0 };
                    best = best.max(e + self.r(child, i + 1, j - 1));
                }
                best
            }
            CmNode::Bif { left, right } => {
                let mut best = f64::NEG_INFINITY;
                for k in i..=j {
                    best = best.max(self.s(left, i, k) + self.s(right, k, j));
                }
                best
            }
        }
    }
}

/// Random Stockholm text with `rows` rows of `cols` columns and a random
/// nested SS_cons. Gaps fall only in unpaired columns so the projected
/// structure stays balanced.
pub fn random_stockholm(rng: &mut impl Rng, rows: usize, cols: usize) -> String {
    let ss = random_structure(rng, cols);
    let mut t = String::from("# STOCKHOLM 1.0\n");
    for r in 0..rows {
        let row: String = ss
            .bytes()
            .map(|c| {
                if c == b'.' && rng.gen_bool(0.15) {
                    '-'
                } else {
                    b"ACGU"[rng.gen_range(0..4)] as char
                }
            })
            .collect();
        t.push_str(&format!("seq{r} {row}\n"));
    }
    t.push_str(&format!("#=GC SS_cons {ss}\n//\n"));
    t
}

/// Model with at most eight consensus columns and random build settings.
pub fn random_model(rng: &mut impl Rng) -> CovarianceModel {
    loop {
        let cols = rng.gen_range(1..=8);
        let rows = rng.gen_range(1..=4);
        let aln = parse_stockholm(&random_stockholm(rng, rows, cols)).unwrap();
        // half the models make long insert runs cheap enough to win; open
        // never undercuts extend, which build_cm rejects
        let (extend, open) = if rng.gen_bool(0.5) {
            let e = rng.gen_range(0.01..0.5);
            (e, e + rng.gen_range(0.0..0.5))
        } else {
            let e = rng.gen_range(0.1..4.0);
            (e, e + rng.gen_range(0.0..4.0))
        };
        let cfg = BuildConfig {
            pseudocount: [0.0, 0.1, 0.5, 1.0][rng.gen_range(0..4)],
            penalties: GapPenalties {
                delete: rng.gen_range(0.5..8.0),
                insert_open: open,
                insert_extend: extend,
            },
        };
        if let Ok(cm) = build_cm(&aln, &cfg) {
            if cm.consensus_length <= 8 {
                return cm;
            }
        }
    }
}

/// CT record of up to 150 bases, with or without explicit numbering.
pub fn random_ct(rng: &mut impl Rng) -> CtRecord {
    let len = rng.gen_range(1..=150);
    let db = random_structure(rng, len);
    let title = format!("rec {}", rng.gen::<u32>());
    let seq = NucleotideSequence::new(title.clone(), &random_rna(rng, len), Alphabet::Rna).unwrap();
    let origin = if rng.gen_bool(0.5) {
        let start = rng.gen_range(1..100_000i64);
        let step = if rng.gen_bool(0.5) { 1 } else { -1 };
        Some((0..len as i64).map(|k| start + step * k).collect())
    } else {
        None
    };
    CtRecord::new(title, seq, table(&db), origin).unwrap()
}
