use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::seqio::{gc_percent_of, reverse_complement, Alphabet, GenomicInterval, NucleotideSequence, Strand};
use crate::structio::{CtRecord, PairTable};

use super::cyk::{cyk_align, encode, fill_column, AlignConfig, AlnColumn, Compiled, Store};
use super::model::CovarianceModel;

/// End positions scored per work unit.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Minimum reported score, bits.
    pub threshold: f64,
    /// Longest scored span as a multiple of the consensus length.
    pub window_factor: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            threshold: 20.0,
            window_factor: 1.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanHit {
    pub model_name: String,
    /// First and last matched consensus columns, 1-based.
    pub query_span: (usize, usize),
    pub target: GenomicInterval,
    /// Length of the scanned sequence, used to map strand offsets.
    pub target_len: usize,
    pub score: f64,
    pub gc: u32,
    /// Matched residues in strand orientation, RNA alphabet.
    pub residues: String,
    /// Traceback; positions index `residues`.
    pub columns: Vec<AlnColumn>,
}

impl ScanHit {
    /// Genome coordinate (1-based) of offset `pos` in `residues`.
    pub fn genome_coord(&self, pos: usize) -> usize {
        match self.target.strand {
            Strand::Plus => self.target.start + pos,
            Strand::Minus => self.target.start - pos,
        }
    }

    pub fn pair_table(&self) -> PairTable {
        let mut stack = Vec::new();
        let mut pairs = Vec::new();
        for c in &self.columns {
            match *c {
                AlnColumn::PairOpen { pos, .. } => stack.push(pos),
                AlnColumn::PairClose { pos, .. } => {
                    let i = stack.pop().expect("traceback pairs are balanced");
                    pairs.push((i + 1, pos + 1));
                }
                _ => {}
            }
        }
        PairTable::from_pairs(self.residues.len(), &pairs).expect("traceback pairs are disjoint")
    }
}

/// Structure of a hit as a CT record carrying genome coordinates.
pub fn traceback_to_structure(hit: &ScanHit) -> CtRecord {
    let seq = NucleotideSequence::new(hit.target.target_id.clone(), hit.residues.as_bytes(), Alphabet::Rna)
        .expect("hit residues are RNA");
    let origin = (0..hit.residues.len()).map(|p| hit.genome_coord(p) as i64).collect();
    let title = format!(
        "{} {}-{} {} {}",
        hit.target.target_id, hit.target.start, hit.target.end, hit.target.strand, hit.model_name
    );
    CtRecord::new(title, seq, hit.pair_table(), Some(origin)).expect("hit record is consistent")
}

/// Best `(score, start, end)` for every exclusive end position in `(from, to]`.
fn score_ends(c: &Compiled, x: &[u8], w: usize, from: usize, to: usize) -> Vec<(f64, usize, usize)> {
    let base = from.saturating_sub(w);
    let mut st = Store::new(c, w + 1, 2);
    let local = &x[base..to];
    let mut out = Vec::with_capacity(to - from);
    for jl in 0..=local.len() {
        fill_column(c, &mut st, local, jl, w);
        let j = base + jl;
        if j <= from {
            continue;
        }
        let mut best = (f64::NEG_INFINITY, 0);
        for d in 1..=jl.min(w) {
            let s = st.s(0, jl, d);
            if s > best.0 {
                best = (s, d);
            }
        }
        out.push((best.0, j - best.1, j));
    }
    out
}

/// Non-overlapping spans chosen best-first.
fn select(mut cands: Vec<(f64, usize, usize)>, threshold: f64) -> Vec<(f64, usize, usize)> {
    cands.retain(|c| c.0 >= threshold);
    cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut kept: Vec<(f64, usize, usize)> = Vec::new();
    for c in cands {
        if kept.iter().all(|k| c.2 <= k.1 || c.1 >= k.2) {
            kept.push(c);
        }
    }
    kept
}

fn scan_strand(
    cm: &CovarianceModel,
    c: &Compiled,
    target_id: &str,
    residues: &[u8],
    strand: Strand,
    config: &ScanConfig,
) -> Result<Vec<ScanHit>> {
    let n = residues.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let w = ((config.window_factor * cm.consensus_length as f64).ceil() as usize).max(1);
    let x = encode(residues);
    let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
    let cands: Vec<(f64, usize, usize)> = starts
        .par_iter()
        .map(|&from| score_ends(c, &x, w, from, (from + CHUNK).min(n)))
        .collect::<Vec<_>>()
        .concat();
    let align = AlignConfig {
        min_window_fraction: 0.0,
        max_window_factor: config.window_factor.max(1.0) + 1.0,
    };
    let mut hits = Vec::new();
    for (_, s, e) in select(cands, config.threshold) {
        let aln = cyk_align(cm, &residues[s..e], &align)?;
        if aln.score < config.threshold {
            continue;
        }
        let (a, b) = (s + aln.start, s + aln.end);
        let rna: Vec<u8> = residues[a..b]
            .iter()
            .map(|&r| match r.to_ascii_uppercase() {
                b'T' => b'U',
                b'A' | b'C' | b'G' | b'U' => r.to_ascii_uppercase(),
                _ => b'N',
            })
            .collect();
        let target = match strand {
            Strand::Plus => GenomicInterval::new(target_id, a + 1, b, strand)?,
            Strand::Minus => GenomicInterval::new(target_id, n - a, n - b + 1, strand)?,
        };
        let matched: Vec<usize> = aln
            .columns
            .iter()
            .filter(|c| c.pos().is_some())
            .filter_map(|c| c.col())
            .collect();
        let query_span = (
            matched.iter().min().map_or(0, |c| c + 1),
            matched.iter().max().map_or(0, |c| c + 1),
        );
        hits.push(ScanHit {
            model_name: cm.name.clone(),
            query_span,
            target,
            target_len: n,
            score: aln.score,
            gc: gc_percent_of(&rna).unwrap_or(0),
            residues: String::from_utf8(rna).expect("ascii"),
            columns: aln.columns,
        });
    }
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.target.start.cmp(&b.target.start)));
    Ok(hits)
}

/// Scans both strands. Plus-strand hits come first, each strand ordered
/// by descending score.
pub fn scan_genome(cm: &CovarianceModel, genome: &NucleotideSequence, config: &ScanConfig) -> Result<Vec<ScanHit>> {
    let c = Compiled::new(cm);
    let plus = genome.residues().to_vec();
    let minus = reverse_complement(genome).residues().to_vec();
    let (p, m) = rayon::join(
        || scan_strand(cm, &c, &genome.id, &plus, Strand::Plus, config),
        || scan_strand(cm, &c, &genome.id, &minus, Strand::Minus, config),
    );
    let mut hits = p?;
    hits.extend(m?);
    Ok(hits)
}
