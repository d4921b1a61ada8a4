//! CYK over the node skeleton.
//!
//! For node `v`, `S_v(j, d)` is the best score of deriving the `d` residues
//! ending before position `j` from the subtree at `v`. Each node may be
//! preceded by a run of inserted residues (affine cost, zero emission) and
//! the child of a pair may be followed by one. Deleting a node costs a flat
//! penalty. Columns are filled for increasing `j`; within a column nodes
//! go from the leaves up.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::{residue_code, CmNode, CovarianceModel};

const NEG: f64 = f64::NEG_INFINITY;

/// One aligned column. Positions are offsets into the aligned residues;
/// columns are 0-based consensus columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AlnColumn {
    Match { col: usize, pos: usize },
    PairOpen { col: usize, pos: usize },
    PairClose { col: usize, pos: usize },
    Delete { col: usize },
    Insert { pos: usize },
}

impl AlnColumn {
    pub fn pos(&self) -> Option<usize> {
        match *self {
            AlnColumn::Match { pos, .. }
            | AlnColumn::PairOpen { pos, .. }
            | AlnColumn::PairClose { pos, .. }
            | AlnColumn::Insert { pos } => Some(pos),
            AlnColumn::Delete { .. } => None,
        }
    }

    pub fn col(&self) -> Option<usize> {
        match *self {
            AlnColumn::Match { col, .. }
            | AlnColumn::PairOpen { col, .. }
            | AlnColumn::PairClose { col, .. }
            | AlnColumn::Delete { col } => Some(col),
            AlnColumn::Insert { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub score: f64,
    /// Aligned span `[start, end)` within the window.
    pub start: usize,
    pub end: usize,
    /// Positions are relative to `start`.
    pub columns: Vec<AlnColumn>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignConfig {
    /// Shortest accepted window as a fraction of the consensus length.
    pub min_window_fraction: f64,
    /// Longest accepted window as a multiple of the consensus length.
    pub max_window_factor: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            min_window_fraction: 0.5,
            max_window_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Kind {
    End,
    Left { e: [f64; 5], c: usize },
    Pair { e: [[f64; 5]; 5], c: usize },
    Bif { a: usize, b: usize },
}

/// Model in the form the kernel wants: emission tables extended with a
/// zero row and column for N.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub kinds: Vec<Kind>,
    /// Slot in the by-start table for nodes that are the left child of a
    /// bifurcation.
    pub slot: Vec<Option<usize>>,
    pub n_slots: usize,
    /// Children of pair nodes, the only ones that take trailing inserts.
    pub needs_ir: Vec<bool>,
    pub open: f64,
    pub ext: f64,
    pub del: f64,
}

impl Compiled {
    pub fn new(cm: &CovarianceModel) -> Self {
        let kinds: Vec<Kind> = cm
            .nodes
            .iter()
            .map(|n| match n {
                CmNode::End => Kind::End,
                CmNode::Left { emit, child, .. } => {
                    let mut e = [0.0; 5];
                    e[..4].copy_from_slice(emit);
                    Kind::Left { e, c: *child }
                }
                CmNode::Pair { emit, child, .. } => {
                    let mut e = [[0.0; 5]; 5];
                    for a in 0..4 {
                        e[a][..4].copy_from_slice(&emit[a]);
                    }
                    Kind::Pair { e, c: *child }
                }
                CmNode::Bif { left, right } => Kind::Bif { a: *left, b: *right },
            })
            .collect();
        let mut slot = vec![None; kinds.len()];
        let mut n_slots = 0;
        for k in &kinds {
            if let Kind::Bif { a, .. } = k {
                slot[*a] = Some(n_slots);
                n_slots += 1;
            }
        }
        let mut needs_ir = vec![false; kinds.len()];
        for k in &kinds {
            if let Kind::Pair { c, .. } = k {
                needs_ir[*c] = true;
            }
        }
        Self {
            kinds,
            slot,
            n_slots,
            needs_ir,
            open: cm.penalties.insert_open,
            ext: cm.penalties.insert_extend,
            del: cm.penalties.delete,
        }
    }
}

/// Ring of `depth` columns, each holding spans `0..w1`. Scanning needs only
/// two columns; with `depth = n + 1` nothing is overwritten and the store
/// doubles as the full table for traceback.
pub(crate) struct Store {
    nv: usize,
    w1: usize,
    depth: usize,
    s: Vec<f64>,
    ir: Vec<f64>,
    /// `S` of bifurcation left children keyed by (start, length) so the
    /// bifurcation sum reads two contiguous runs.
    by_start: Vec<f64>,
    /// Scratch for one node's `M` values.
    m: Vec<f64>,
}

impl Store {
    pub fn new(cm: &Compiled, w1: usize, depth: usize) -> Self {
        let nv = cm.kinds.len();
        Self {
            nv,
            w1,
            depth,
            s: vec![NEG; depth * nv * w1],
            ir: vec![NEG; depth * nv * w1],
            by_start: vec![NEG; cm.n_slots * w1 * w1],
            m: vec![NEG; w1],
        }
    }

    #[inline]
    fn idx(&self, v: usize, j: usize, d: usize) -> usize {
        ((j % self.depth) * self.nv + v) * self.w1 + d
    }

    #[inline]
    pub fn s(&self, v: usize, j: usize, d: usize) -> f64 {
        self.s[self.idx(v, j, d)]
    }

    #[inline]
    pub fn ir(&self, v: usize, j: usize, d: usize) -> f64 {
        self.ir[self.idx(v, j, d)]
    }

    #[inline]
    fn r(&self, v: usize, j: usize, d: usize) -> f64 {
        let i = self.idx(v, j, d);
        self.s[i].max(self.ir[i])
    }

    fn column(&self, v: usize, j: usize, len: usize) -> &[f64] {
        let i = self.idx(v, j, 0);
        &self.s[i..i + len]
    }

    fn starting(&self, slot: usize, start: usize, len: usize) -> &[f64] {
        let i = (slot * self.w1 + start % self.w1) * self.w1;
        &self.by_start[i..i + len]
    }
}

/// `M_v(j, d)`: best score with `v` deriving exactly `x[j-d..j)` and no
/// leading insertion. Shared by the fill and the traceback so both see
/// bit-identical values.
#[inline]
fn m_value(cm: &Compiled, st: &Store, x: &[u8], v: usize, j: usize, d: usize) -> f64 {
    match &cm.kinds[v] {
        Kind::End => {
            if d == 0 {
                0.0
            } else {
                NEG
            }
        }
        Kind::Left { e, c } => {
            let del = -cm.del + st.s(*c, j, d);
            if d == 0 {
                del
            } else {
                (e[x[j - d] as usize] + st.s(*c, j, d - 1)).max(del)
            }
        }
        Kind::Pair { e, c } => {
            let del = -cm.del + st.r(*c, j, d);
            if d < 2 {
                del
            } else {
                (e[x[j - d] as usize][x[j - 1] as usize] + st.r(*c, j - 1, d - 2)).max(del)
            }
        }
        Kind::Bif { a, b } => {
            let left = st.starting(cm.slot[*a].expect("left child has a slot"), j - d, d + 1);
            bif_sum(left, st.column(*b, j, d + 1))
        }
    }
}

/// `max_k left[d - k] + right[k]` for `d = right.len() - 1`. Four
/// accumulators let the loop vectorize; max is exact so the grouping does
/// not change the result.
#[inline]
fn bif_sum(left: &[f64], right: &[f64]) -> f64 {
    let n = right.len();
    let mut acc = [NEG; 4];
    let mut k = 0;
    while k + 4 <= n {
        for t in 0..4 {
            acc[t] = acc[t].max(left[n - 1 - k - t] + right[k + t]);
        }
        k += 4;
    }
    let mut best = acc[0].max(acc[1]).max(acc[2].max(acc[3]));
    while k < n {
        best = best.max(left[n - 1 - k] + right[k]);
        k += 1;
    }
    best
}

#[inline]
fn ins_step(cm: &Compiled, prev_m: f64, prev_ins: f64) -> f64 {
    (-cm.open + prev_m).max(-cm.ext + prev_ins)
}

/// Fills column `j` for spans up to `maxd`. Same arithmetic as
/// [`m_value`], unrolled per node so the inner loops run over slices.
pub(crate) fn fill_column(cm: &Compiled, st: &mut Store, x: &[u8], j: usize, maxd: usize) {
    let dmax = j.min(maxd);
    let (nv, w1, depth) = (st.nv, st.w1, st.depth);
    let cur = (j % depth) * nv * w1;
    let prev = if j > 0 { ((j - 1) % depth) * nv * w1 } else { 0 };
    let Store { s, ir, by_start, m, .. } = st;
    let m = &mut m[..=dmax];
    for v in (0..cm.kinds.len()).rev() {
        match &cm.kinds[v] {
            Kind::End => {
                m.fill(NEG);
                m[0] = 0.0;
            }
            Kind::Left { e, c } => {
                let cs = &s[cur + c * w1..][..=dmax];
                m[0] = -cm.del + cs[0];
                for d in 1..=dmax {
                    m[d] = (e[x[j - d] as usize] + cs[d - 1]).max(-cm.del + cs[d]);
                }
            }
            Kind::Pair { e, c } => {
                let cs = &s[cur + c * w1..][..=dmax];
                let ci = &ir[cur + c * w1..][..=dmax];
                for d in 0..dmax.min(1) + 1 {
                    m[d] = -cm.del + cs[d].max(ci[d]);
                }
                if dmax >= 2 {
                    let er = x[j - 1] as usize;
                    let ps = &s[prev + c * w1..][..dmax - 1];
                    let pi = &ir[prev + c * w1..][..dmax - 1];
                    for d in 2..=dmax {
                        let emit = e[x[j - d] as usize][er] + ps[d - 2].max(pi[d - 2]);
                        m[d] = emit.max(-cm.del + cs[d].max(ci[d]));
                    }
                }
            }
            Kind::Bif { a, b } => {
                let slot = cm.slot[*a].expect("left child has a slot");
                let right = &s[cur + b * w1..][..=dmax];
                for d in 0..=dmax {
                    let i = (slot * w1 + (j - d) % w1) * w1;
                    m[d] = bif_sum(&by_start[i..i + d + 1], &right[..=d]);
                }
            }
        }
        let out = &mut s[cur + v * w1..][..=dmax];
        let mut ins = NEG;
        out[0] = m[0];
        for d in 1..=dmax {
            ins = ins_step(cm, m[d - 1], ins);
            out[d] = m[d].max(ins);
        }
        if let Some(slot) = cm.slot[v] {
            for d in 0..=dmax {
                by_start[(slot * w1 + (j - d) % w1) * w1 + d] = s[cur + v * w1 + d];
            }
        }
        if cm.needs_ir[v] {
            ir[cur + v * w1] = NEG;
            if j > 0 {
                for d in 1..=dmax {
                    let (ps, pi) = (s[prev + v * w1 + d - 1], ir[prev + v * w1 + d - 1]);
                    ir[cur + v * w1 + d] = (-cm.open + ps).max(-cm.ext + pi);
                }
            }
        }
    }
}

pub fn encode(residues: &[u8]) -> Vec<u8> {
    residues.iter().map(|&b| residue_code(b)).collect()
}

struct Tracer<'a> {
    cm: &'a Compiled,
    st: &'a Store,
    x: &'a [u8],
    cols: &'a [Option<(usize, usize)>],
    out: Vec<AlnColumn>,
}

impl Tracer<'_> {
    fn s(&mut self, v: usize, j: usize, d: usize) {
        let target = self.st.s(v, j, d);
        let m = m_value(self.cm, self.st, self.x, v, j, d);
        if m == target {
            self.m(v, j, d);
            return;
        }
        // rebuild the insertion chain of this column to find where it opens
        let mut ms = Vec::with_capacity(d + 1);
        let mut ins = vec![NEG; d + 1];
        for dd in 0..=d {
            ms.push(m_value(self.cm, self.st, self.x, v, j, dd));
            if dd > 0 {
                ins[dd] = ins_step(self.cm, ms[dd - 1], ins[dd - 1]);
            }
        }
        debug_assert_eq!(ins[d], target);
        let mut dd = d;
        loop {
            self.out.push(AlnColumn::Insert { pos: j - dd });
            if -self.cm.open + ms[dd - 1] == ins[dd] {
                self.m(v, j, dd - 1);
                return;
            }
            dd -= 1;
        }
    }

    fn r(&mut self, v: usize, j: usize, d: usize) {
        if self.st.s(v, j, d) >= self.st.ir(v, j, d) {
            self.s(v, j, d);
            return;
        }
        // trailing insertions: find how many, then derive the rest
        let mut run = 0;
        let (mut jj, mut dd) = (j, d);
        loop {
            run += 1;
            let here = self.st.ir(v, jj, dd);
            if -self.cm.open + self.st.s(v, jj - 1, dd - 1) == here {
                break;
            }
            jj -= 1;
            dd -= 1;
        }
        self.s(v, j - run, d - run);
        for p in (j - run)..j {
            self.out.push(AlnColumn::Insert { pos: p });
        }
    }

    fn m(&mut self, v: usize, j: usize, d: usize) {
        let cm = self.cm;
        let st = self.st;
        let target = m_value(cm, st, self.x, v, j, d);
        match &cm.kinds[v] {
            Kind::End => debug_assert_eq!(d, 0),
            Kind::Left { e, c } => {
                let col = self.cols[v].expect("left node has a column").0;
                if d > 0 && e[self.x[j - d] as usize] + st.s(*c, j, d - 1) == target {
                    self.out.push(AlnColumn::Match { col, pos: j - d });
                    self.s(*c, j, d - 1);
                } else {
                    self.out.push(AlnColumn::Delete { col });
                    self.s(*c, j, d);
                }
            }
            Kind::Pair { e, c } => {
                let (lc, rc) = self.cols[v].expect("pair node has columns");
                if d >= 2 && e[self.x[j - d] as usize][self.x[j - 1] as usize] + st.r(*c, j - 1, d - 2) == target {
                    self.out.push(AlnColumn::PairOpen { col: lc, pos: j - d });
                    self.r(*c, j - 1, d - 2);
                    self.out.push(AlnColumn::PairClose { col: rc, pos: j - 1 });
                } else {
                    self.out.push(AlnColumn::Delete { col: lc });
                    self.r(*c, j, d);
                    self.out.push(AlnColumn::Delete { col: rc });
                }
            }
            Kind::Bif { a, b } => {
                let k = (0..=d)
                    .find(|&k| st.s(*a, j - k, d - k) + st.s(*b, j, k) == target)
                    .expect("bifurcation split reproduces its score");
                self.s(*a, j - k, d - k);
                self.s(*b, j, k);
            }
        }
    }
}

fn node_columns(cm: &CovarianceModel) -> Vec<Option<(usize, usize)>> {
    cm.nodes
        .iter()
        .map(|n| match n {
            CmNode::Left { column, .. } => Some((*column, *column)),
            CmNode::Pair {
                left_column,
                right_column,
                ..
            } => Some((*left_column, *right_column)),
            _ => None,
        })
        .collect()
}

/// Best local alignment of the model to any span of `window`.
pub fn cyk_align(cm: &CovarianceModel, window: &[u8], config: &AlignConfig) -> Result<Alignment> {
    let n = window.len();
    let min_len = (config.min_window_fraction * cm.consensus_length as f64).ceil() as usize;
    if n < min_len.max(1) {
        return Err(Error::invalid(format!(
            "window of {n} residues is shorter than the minimum of {}",
            min_len.max(1)
        )));
    }
    let max_len = (config.max_window_factor * cm.consensus_length as f64).ceil() as usize;
    if n > max_len.max(1) {
        return Err(Error::invalid(format!(
            "window of {n} residues exceeds the maximum of {max_len}"
        )));
    }
    let c = Compiled::new(cm);
    let x = encode(window);
    let mut st = Store::new(&c, n + 1, n + 1);
    let mut best = (NEG, 0, 0);
    for j in 0..=n {
        fill_column(&c, &mut st, &x, j, n);
        for d in 1..=j {
            let s = st.s(0, j, d);
            if s > best.0 {
                best = (s, j, d);
            }
        }
    }
    let (score, j, d) = best;
    if score == NEG {
        return Err(Error::Internal("no finite derivation".into()));
    }
    let cols = node_columns(cm);
    let mut t = Tracer {
        cm: &c,
        st: &st,
        x: &x,
        cols: &cols,
        out: Vec::new(),
    };
    t.s(0, j, d);
    let start = j - d;
    let columns = t
        .out
        .into_iter()
        .map(|col| match col {
            AlnColumn::Match { col, pos } => AlnColumn::Match { col, pos: pos - start },
            AlnColumn::PairOpen { col, pos } => AlnColumn::PairOpen { col, pos: pos - start },
            AlnColumn::PairClose { col, pos } => AlnColumn::PairClose { col, pos: pos - start },
            AlnColumn::Insert { pos } => AlnColumn::Insert { pos: pos - start },
            other => other,
        })
        .collect();
    Ok(Alignment {
        score,
        start,
        end: j,
        columns,
    })
}

/// Score of a traceback recomputed from the model: emissions plus gap
/// penalties. Used to check that a traceback is a real derivation.
pub fn score_columns(cm: &CovarianceModel, residues: &[u8], columns: &[AlnColumn]) -> f64 {
    let x = encode(residues);
    let mut left_emit = std::collections::HashMap::new();
    let mut pair_emit = std::collections::HashMap::new();
    for n in &cm.nodes {
        match n {
            CmNode::Left { column, emit, .. } => {
                left_emit.insert(*column, *emit);
            }
            CmNode::Pair {
                left_column,
                right_column,
                emit,
                ..
            } => {
                pair_emit.insert(*left_column, (*right_column, *emit));
            }
            _ => {}
        }
    }
    let mut score = 0.0;
    let mut open_pairs: Vec<(usize, usize)> = Vec::new();
    let mut prev_insert = false;
    for c in columns {
        match *c {
            AlnColumn::Insert { .. } => {
                score -= if prev_insert {
                    cm.penalties.insert_extend
                } else {
                    cm.penalties.insert_open
                };
                prev_insert = true;
                continue;
            }
            AlnColumn::Match { col, pos } => {
                let k = x[pos] as usize;
                if k < 4 {
                    score += left_emit[&col][k];
                }
            }
            AlnColumn::PairOpen { col, pos } => open_pairs.push((col, pos)),
            AlnColumn::PairClose { pos, .. } => {
                let (lc, lp) = open_pairs.pop().expect("balanced pairs");
                let (a, b) = (x[lp] as usize, x[pos] as usize);
                if a < 4 && b < 4 {
                    score += pair_emit[&lc].1[a][b];
                }
            }
            AlnColumn::Delete { col } => {
                // a deleted pair is charged once, on its left column
                let is_right = pair_emit.values().any(|(rc, _)| *rc == col);
                if !is_right {
                    score -= cm.penalties.delete;
                }
            }
        }
        prev_insert = false;
    }
    score
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmscan::model::{build_cm, BuildConfig};
    use crate::structio::parse_stockholm;

    fn model(rows: &[&str], ss: &str, pc: f64) -> CovarianceModel {
        let mut t = String::from("# STOCKHOLM 1.0\n");
        for (i, r) in rows.iter().enumerate() {
            t.push_str(&format!("s{i} {r}\n"));
        }
        t.push_str(&format!("#=GC SS_cons {ss}\n//\n"));
        build_cm(
            &parse_stockholm(&t).unwrap(),
            &BuildConfig {
                pseudocount: pc,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn loose() -> AlignConfig {
        AlignConfig {
            min_window_fraction: 0.0,
            max_window_factor: 10.0,
        }
    }

    #[test]
    fn single_pair_node() {
        let cm = model(&["GC"], "()", 0.0);
        let CmNode::Pair { emit, .. } = &cm.nodes[0] else {
            panic!()
        };
        let a = cyk_align(&cm, b"GC", &loose()).unwrap();
        assert_eq!(a.score, emit[2][1]);
        assert_eq!(
            a.columns,
            vec![
                AlnColumn::PairOpen { col: 0, pos: 0 },
                AlnColumn::PairClose { col: 1, pos: 1 }
            ]
        );
    }

    #[test]
    fn all_n_window_scores_at_most_zero() {
        let cm = model(&["GGGAAACCC", "GGCAAAGCC"], "(((...)))", 1.0);
        let a = cyk_align(&cm, &[b'N'; 12], &loose()).unwrap();
        assert!(a.score <= 0.0);
    }

    #[test]
    fn insertion_between_stem_and_loop() {
        let cm = model(&["GGGGAUACCCC", "GGGGAUACCCC"], "((((...))))", 0.01);
        let w = b"GGGGCAUACCCC";
        let a = cyk_align(&cm, w, &loose()).unwrap();
        assert_eq!((a.start, a.end), (0, 12));
        assert!(a.columns.contains(&AlnColumn::Insert { pos: 4 }), "{:?}", a.columns);
        assert!((score_columns(&cm, w, &a.columns) - a.score).abs() < 1e-9);
        let ct_pairs = a
            .columns
            .iter()
            .filter(|c| matches!(c, AlnColumn::PairOpen { .. }))
            .count();
        assert_eq!(ct_pairs, 4);
    }

    #[test]
    fn short_window_is_rejected() {
        let cm = model(&["GGGAAACCC"], "(((...)))", 1.0);
        let cfg = AlignConfig::default();
        assert!(cyk_align(&cm, b"GGG", &cfg).is_err());
        assert!(cyk_align(&cm, b"GGGAAACCC", &cfg).is_ok());
    }

    #[test]
    fn traceback_scores_match() {
        let cm = model(&["GGACUAGUCC", "GGAGAAAUCC", "GCACUUGUGC"], "((.(...)))", 1.0);
        for w in [&b"UUGGACUAGUCCAA"[..], b"GGAUCC", b"ACGUACGUACGUAC"] {
            let a = cyk_align(&cm, w, &loose()).unwrap();
            let again = score_columns(&cm, &w[a.start..a.end], &a.columns);
            assert!((again - a.score).abs() < 1e-9, "{again} vs {}", a.score);
        }
    }
}
