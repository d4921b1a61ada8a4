use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structio::{is_gap, PairTable, StockholmAlignment};

/// Emissions are clamped here instead of reaching -inf.
pub const MIN_LOG_ODDS: f64 = -20.0;

const BG_FLOOR: f64 = 0.01;

/// Index of a residue in `ACGU` order; anything else (N) is 4.
pub fn residue_code(b: u8) -> u8 {
    match b.to_ascii_uppercase() {
        b'A' => 0,
        b'C' => 1,
        b'G' => 2,
        b'U' | b'T' => 3,
        _ => 4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPenalties {
    /// Cost of skipping a consensus node, bits.
    pub delete: f64,
    pub insert_open: f64,
    pub insert_extend: f64,
}

// Calibrated so that uniform random background stays under the default
// 20-bit scan threshold; cheaper gaps let chance alignments of a ~100
// column model reach 25 bits.
impl Default for GapPenalties {
    fn default() -> Self {
        Self {
            delete: 6.0,
            insert_open: 6.0,
            insert_extend: 2.0,
        }
    }
}

impl GapPenalties {
    /// Opening must cost at least as much as extending. Otherwise two runs
    /// side by side (before a node and after its child) beat one run, and a
    /// traceback, which cannot tell them apart, no longer rescores to the
    /// alignment score.
    pub fn validate(&self) -> Result<()> {
        if ![self.delete, self.insert_open, self.insert_extend]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
        {
            return Err(Error::invalid("penalties must be finite and non-negative"));
        }
        if self.insert_open < self.insert_extend {
            return Err(Error::invalid(format!(
                "insert open cost {} is below extend cost {}",
                self.insert_open, self.insert_extend
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub pseudocount: f64,
    pub penalties: GapPenalties,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            pseudocount: 0.25,
            penalties: GapPenalties::default(),
        }
    }
}

/// Derivation skeleton node. Children always have larger indices than
/// their parent; node 0 is the root. Columns are 0-based consensus columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CmNode {
    End,
    Left {
        column: usize,
        /// log2 odds in ACGU order.
        emit: [f64; 4],
        child: usize,
    },
    Pair {
        left_column: usize,
        right_column: usize,
        /// `emit[a][b]`: left residue `a`, right residue `b`.
        emit: [[f64; 4]; 4],
        child: usize,
    },
    Bif {
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    pub name: String,
    pub consensus_length: usize,
    /// Most frequent residue per consensus column.
    pub consensus: String,
    /// Consensus structure over consensus columns, as dot-bracket.
    pub guide: String,
    pub nodes: Vec<CmNode>,
    pub penalties: GapPenalties,
    /// Background frequencies in ACGU order.
    pub null: [f64; 4],
    pub pseudocount: f64,
}

impl CovarianceModel {
    pub fn guide_pairs(&self) -> Result<PairTable> {
        crate::structio::parse_wuss(&self.guide)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cm: CovarianceModel = serde_json::from_str(text)?;
        cm.validate()?;
        Ok(cm)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::format("model", msg.to_string()));
        if self.nodes.is_empty() {
            return bad("no nodes");
        }
        if self.consensus.len() != self.consensus_length || self.guide.len() != self.consensus_length {
            return bad("consensus length mismatch");
        }
        let n = self.nodes.len();
        let finite = |v: f64| v.is_finite();
        for (i, node) in self.nodes.iter().enumerate() {
            let ok = match node {
                CmNode::End => true,
                CmNode::Left { column, emit, child } => {
                    *child > i && *child < n && *column < self.consensus_length && emit.iter().all(|&v| finite(v))
                }
                CmNode::Pair {
                    left_column,
                    right_column,
                    emit,
                    child,
                } => {
                    *child > i
                        && *child < n
                        && left_column < right_column
                        && *right_column < self.consensus_length
                        && emit.iter().flatten().all(|&v| finite(v))
                }
                CmNode::Bif { left, right } => *left > i && *right > i && *left < n && *right < n,
            };
            if !ok {
                return bad(&format!("node {i} is malformed"));
            }
        }
        self.penalties.validate()?;
        if !self.null.iter().all(|&q| q > 0.0 && q.is_finite()) {
            return bad("null model must be positive");
        }
        Ok(())
    }
}

fn log_odds(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        MIN_LOG_ODDS
    } else {
        (p / q).log2().max(MIN_LOG_ODDS)
    }
}

struct Builder<'a> {
    rows: Vec<Vec<u8>>,
    pairs: &'a PairTable,
    null: [f64; 4],
    pc: f64,
    nodes: Vec<CmNode>,
}

impl Builder<'_> {
    fn left_emit(&self, c: usize) -> [f64; 4] {
        let mut counts = [0.0; 4];
        for r in &self.rows {
            let k = residue_code(r[c]) as usize;
            if k < 4 {
                counts[k] += 1.0;
            }
        }
        let total: f64 = counts.iter().sum::<f64>() + 4.0 * self.pc;
        std::array::from_fn(|a| {
            let p = if total > 0.0 {
                (counts[a] + self.pc) / total
            } else {
                0.25
            };
            log_odds(p, self.null[a])
        })
    }

    fn pair_emit(&self, l: usize, r: usize) -> [[f64; 4]; 4] {
        let mut counts = [[0.0; 4]; 4];
        for row in &self.rows {
            let (a, b) = (residue_code(row[l]) as usize, residue_code(row[r]) as usize);
            if a < 4 && b < 4 {
                counts[a][b] += 1.0;
            }
        }
        let total: f64 = counts.iter().flatten().sum::<f64>() + 16.0 * self.pc;
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let p = if total > 0.0 {
                    (counts[a][b] + self.pc) / total
                } else {
                    1.0 / 16.0
                };
                log_odds(p, self.null[a] * self.null[b])
            })
        })
    }

    /// Builds the subtree for consensus interval `[a, b)` and returns its index.
    fn build(&mut self, a: usize, b: usize) -> usize {
        let me = self.nodes.len();
        if a == b {
            self.nodes.push(CmNode::End);
            return me;
        }
        match self.pairs.partner(a + 1).map(|p| p - 1) {
            None => {
                let emit = self.left_emit(a);
                self.nodes.push(CmNode::End);
                let child = self.build(a + 1, b);
                self.nodes[me] = CmNode::Left { column: a, emit, child };
            }
            Some(k) if k == b - 1 => {
                let emit = self.pair_emit(a, k);
                self.nodes.push(CmNode::End);
                let child = self.build(a + 1, k);
                self.nodes[me] = CmNode::Pair {
                    left_column: a,
                    right_column: k,
                    emit,
                    child,
                };
            }
            Some(k) => {
                self.nodes.push(CmNode::End);
                let left = self.build(a, k + 1);
                let right = self.build(k + 1, b);
                self.nodes[me] = CmNode::Bif { left, right };
            }
        }
        me
    }
}

/// Builds a model over the columns where fewer than half of the rows have a
/// gap. Emissions are log2 odds against the alignment's own residue
/// composition, floored at 1% per residue.
pub fn build_cm(aln: &StockholmAlignment, config: &BuildConfig) -> Result<CovarianceModel> {
    if aln.rows.is_empty() {
        return Err(Error::invalid("alignment has no sequences"));
    }
    if !(config.pseudocount >= 0.0 && config.pseudocount.is_finite()) {
        return Err(Error::invalid("pseudocount must be finite and non-negative"));
    }
    config.penalties.validate()?;
    let cols = aln.consensus_columns();
    if cols.is_empty() {
        return Err(Error::invalid("alignment has no consensus columns"));
    }
    let pairs = aln.consensus_structure()?;

    let mut bg = [0.0f64; 4];
    for r in &aln.rows {
        for &b in &r.residues {
            let k = residue_code(b) as usize;
            if !is_gap(b) && k < 4 {
                bg[k] += 1.0;
            }
        }
    }
    let total: f64 = bg.iter().sum();
    let mut null = if total > 0.0 {
        bg.map(|c| (c / total).max(BG_FLOOR))
    } else {
        [0.25; 4]
    };
    let s: f64 = null.iter().sum();
    null.iter_mut().for_each(|q| *q /= s);

    let rows: Vec<Vec<u8>> = aln
        .rows
        .iter()
        .map(|r| cols.iter().map(|&c| r.residues[c]).collect())
        .collect();
    let consensus: String = (0..cols.len())
        .map(|c| {
            let mut counts = [0usize; 4];
            for r in &rows {
                let k = residue_code(r[c]) as usize;
                if k < 4 {
                    counts[k] += 1;
                }
            }
            let best = (0..4).fold(0, |b, k| if counts[k] > counts[b] { k } else { b });
            if counts[best] == 0 {
                'N'
            } else {
                b"ACGU"[best] as char
            }
        })
        .collect();

    let mut b = Builder {
        rows,
        pairs: &pairs,
        null,
        pc: config.pseudocount,
        nodes: Vec::new(),
    };
    b.build(0, cols.len());
    let cm = CovarianceModel {
        name: aln.name.clone().unwrap_or_else(|| "model".to_string()),
        consensus_length: cols.len(),
        consensus,
        guide: pairs.to_dot_bracket(),
        nodes: b.nodes,
        penalties: config.penalties,
        null,
        pseudocount: config.pseudocount,
    };
    cm.validate()?;
    Ok(cm)
}
