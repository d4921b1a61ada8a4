//! Plain-text report in the layout CMsearch users expect.

use std::fmt::Write as _;

use crate::cmscan::{AlnColumn, CovarianceModel};
use crate::junction::is_canonical_pair;
use crate::seqio::Strand;

use super::HitAnalysis;

pub const NO_HITS: &str = "No hits containing multi-branch loops.";

/// Alignment columns per block.
const WIDTH: usize = 60;

struct Row {
    structure: u8,
    query: u8,
    matched: u8,
    target: u8,
    col: Option<usize>,
    pos: Option<usize>,
}

fn rows(a: &HitAnalysis, model: &CovarianceModel) -> Vec<Row> {
    let guide = model.guide.as_bytes();
    let cons = model.consensus.as_bytes();
    let res = a.hit.residues.as_bytes();
    let pt = a.hit.pair_table();
    let canonical = |pos: usize| match pt.partner(pos + 1) {
        Some(q) => is_canonical_pair(res[pos], res[q - 1]),
        None => false,
    };
    a.hit
        .columns
        .iter()
        .map(|c| match *c {
            AlnColumn::Match { col, pos } | AlnColumn::PairOpen { col, pos } | AlnColumn::PairClose { col, pos } => {
                let (q, t) = (cons[col].to_ascii_uppercase(), res[pos]);
                let matched = if q == t {
                    t
                } else if guide[col] != b'.' && canonical(pos) {
                    b'+'
                } else {
                    b' '
                };
                Row {
                    structure: guide[col],
                    query: q,
                    matched,
                    target: t,
                    col: Some(col),
                    pos: Some(pos),
                }
            }
            // deleted columns show no structure so that the brackets on the
            // structure line are exactly the pairs of the hit
            AlnColumn::Delete { col } => Row {
                structure: b'-',
                query: cons[col].to_ascii_uppercase(),
                matched: b' ',
                target: b'-',
                col: Some(col),
                pos: None,
            },
            AlnColumn::Insert { pos } => Row {
                structure: b'.',
                query: b'.',
                matched: b' ',
                target: res[pos].to_ascii_lowercase(),
                col: None,
                pos: Some(pos),
            },
        })
        .collect()
}

fn span(it: impl Iterator<Item = usize> + Clone) -> Option<(usize, usize)> {
    Some((it.clone().next()?, it.last()?))
}

fn write_alignment(out: &mut String, a: &HitAnalysis, model: &CovarianceModel) {
    let rows = rows(a, model);
    let coord_width = [a.hit.target.start, a.hit.target.end, model.consensus_length]
        .iter()
        .map(|v| v.to_string().len())
        .max()
        .unwrap_or(1);
    let pad = " ".repeat(coord_width + 1);
    let text = |b: &[Row], f: fn(&Row) -> u8| String::from_utf8(b.iter().map(f).collect()).expect("ascii");
    for block in rows.chunks(WIDTH) {
        let q = span(block.iter().filter_map(|r| r.col)).map(|(x, y)| (x + 1, y + 1));
        let t = span(block.iter().filter_map(|r| r.pos)).map(|(x, y)| (a.hit.genome_coord(x), a.hit.genome_coord(y)));
        let label = |v: Option<(usize, usize)>, first: bool| match v {
            Some((x, y)) => (if first { x } else { y }).to_string(),
            None => "-".to_string(),
        };
        let _ = writeln!(out, "{pad}{}", text(block, |r| r.structure));
        let _ = writeln!(
            out,
            "{:>w$} {} {}",
            label(q, true),
            text(block, |r| r.query),
            label(q, false),
            w = coord_width
        );
        let _ = writeln!(out, "{pad}{}", text(block, |r| r.matched));
        let _ = writeln!(
            out,
            "{:>w$} {} {}",
            label(t, true),
            text(block, |r| r.target),
            label(t, false),
            w = coord_width
        );
        out.push('\n');
    }
}

/// Report for one target sequence. `analyses` should already be filtered
/// and ordered as [`run_scan_pipeline`](super::run_scan_pipeline) returns
/// them.
pub fn format_text_report(analyses: &[HitAnalysis], model: &CovarianceModel, target: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "CM: {}", model.name);
    let _ = writeln!(out, ">{target}");
    out.push('\n');
    if analyses.is_empty() {
        let _ = writeln!(out, "{NO_HITS}");
        return out;
    }
    for strand in [Strand::Plus, Strand::Minus] {
        let here: Vec<&HitAnalysis> = analyses.iter().filter(|a| a.hit.target.strand == strand).collect();
        if here.is_empty() {
            continue;
        }
        let name = match strand {
            Strand::Plus => "Plus",
            Strand::Minus => "Minus",
        };
        let _ = writeln!(out, "  {name} strand results:\n");
        for a in here {
            let h = &a.hit;
            let _ = writeln!(
                out,
                "Query = {} - {}, Target = {} - {}",
                h.query_span.0, h.query_span.1, h.target.start, h.target.end
            );
            let _ = writeln!(out, "Score = {:.2}, GC = {}\n", h.score, h.gc);
            let _ = writeln!(out, "Coax status = {}\n", a.status_text());
            write_alignment(&mut out, a, model);
        }
    }
    out
}
