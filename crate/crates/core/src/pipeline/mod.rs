//! Scan, fold the hit into a structure, extract junctions, predict, report.

mod output;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmscan::{scan_genome, traceback_to_structure, CovarianceModel, ScanConfig, ScanHit};
use crate::error::Result;
use crate::features::{extract_features, FeatureVector};
use crate::forest::{predict, CoaxLabel, RandomForest};
use crate::junction::{junctions_in_ct, ThreeWayJunction};
use crate::seqio::NucleotideSequence;
use crate::structio::CtRecord;
use crate::thermo::ThermoParams;

pub use output::{emit_machine_output, format_json, format_tsv, write_ct_dir, OutputFormat, TSV_HEADER};
pub use report::{format_text_report, NO_HITS};

/// Status shown for loops with four or more helices.
pub const HIGHER_ORDER_STATUS: &str = "higher-order junction (unclassified)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionCall {
    pub junction: ThreeWayJunction,
    pub features: FeatureVector,
    pub label: CoaxLabel,
    /// Votes in `CoaxLabel::ALL` order.
    pub votes: [u32; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitAnalysis {
    pub hit: ScanHit,
    pub ct: CtRecord,
    /// Three-way junctions in 5' order of their enclosing pair.
    pub junctions: Vec<JunctionCall>,
    /// Closing pairs of loops with more than three helices.
    pub higher_order: Vec<(usize, usize)>,
    /// Predicted labels other than NONE, 5' order.
    pub coax_status: Vec<CoaxLabel>,
}

impl HitAnalysis {
    /// Whether the hit has a multibranch loop worth reporting.
    pub fn has_mbl(&self) -> bool {
        !self.junctions.is_empty() || !self.higher_order.is_empty()
    }

    /// Right-hand side of the `Coax status =` line.
    pub fn status_text(&self) -> String {
        format_status(&self.coax_status, !self.higher_order.is_empty())
    }
}

/// Labels joined by ", ", the higher-order marker last, or "none".
pub fn format_status(labels: &[CoaxLabel], higher_order: bool) -> String {
    let mut parts: Vec<&str> = labels.iter().map(|l| l.as_str()).collect();
    if higher_order {
        parts.push(HIGHER_ORDER_STATUS);
    }
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join(", ")
    }
}

/// Labels every three-way junction of a structure, 5' order.
pub fn classify_structure(
    ct: &CtRecord,
    forest: &RandomForest,
    params: &ThermoParams,
) -> (Vec<JunctionCall>, Vec<(usize, usize)>) {
    let scan = junctions_in_ct(ct);
    let calls = scan
        .junctions
        .into_iter()
        .map(|junction| {
            let features = extract_features(&junction, params);
            let p = predict(forest, &features);
            JunctionCall {
                junction,
                features,
                label: p.label,
                votes: p.votes,
            }
        })
        .collect();
    (calls, scan.higher_order)
}

pub fn coax_status(calls: &[JunctionCall]) -> Vec<CoaxLabel> {
    calls
        .iter()
        .map(|c| c.label)
        .filter(|&l| l != CoaxLabel::None)
        .collect()
}

pub fn analyze_hit(hit: &ScanHit, forest: &RandomForest, params: &ThermoParams) -> HitAnalysis {
    let ct = traceback_to_structure(hit);
    let (junctions, higher_order) = classify_structure(&ct, forest, params);
    HitAnalysis {
        hit: hit.clone(),
        coax_status: coax_status(&junctions),
        ct,
        junctions,
        higher_order,
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub scan: ScanConfig,
    pub params: ThermoParams,
}

/// Hits with at least one multibranch loop, plus strand first, each strand
/// by descending score.
pub fn run_scan_pipeline(
    model: &CovarianceModel,
    genome: &NucleotideSequence,
    forest: &RandomForest,
    config: &PipelineConfig,
) -> Result<Vec<HitAnalysis>> {
    let hits = scan_genome(model, genome, &config.scan)?;
    let mut out: Vec<HitAnalysis> = hits
        .par_iter()
        .map(|h| analyze_hit(h, forest, &config.params))
        .filter(|a| {
            if !a.has_mbl() {
                log::info!(
                    "hit {}-{} {} dropped: no multibranch loop",
                    a.hit.target.start,
                    a.hit.target.end,
                    a.hit.target.strand
                );
            }
            a.has_mbl()
        })
        .collect();
    out.sort_by(|a, b| {
        a.hit
            .target
            .strand
            .cmp(&b.hit.target.strand)
            .then(b.hit.score.total_cmp(&a.hit.score))
            .then(a.hit.target.start.cmp(&b.hit.target.start))
    });
    Ok(out)
}
