//! TSV, JSON and CT-directory output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::FEATURE_NAMES;
use crate::forest::CoaxLabel;
use crate::seqio::Strand;
use crate::structio::write_ct;

use super::HitAnalysis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Tsv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "tsv" => Ok(OutputFormat::Tsv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(format!(
                "unknown output format {s:?}; expected text, tsv or json"
            ))),
        }
    }
}

/// Leading TSV columns; the 15 feature names, `label` and one vote column
/// per label follow.
pub const TSV_HEADER: [&str; 11] = [
    "target",
    "strand",
    "hit_start",
    "hit_end",
    "score",
    "S1ID5",
    "S1ID3",
    "S2ID5",
    "S2ID3",
    "S3ID5",
    "S3ID3",
];

/// One row per junction. Junction coordinates are positions in the hit.
pub fn format_tsv(analyses: &[HitAnalysis]) -> String {
    let mut head: Vec<String> = TSV_HEADER.iter().map(|s| s.to_string()).collect();
    head.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    head.push("label".into());
    head.extend(CoaxLabel::ALL.iter().map(|l| format!("votes_{}", l.as_str())));
    let mut out = head.join("\t");
    out.push('\n');
    for a in analyses {
        let h = &a.hit;
        for call in &a.junctions {
            let mut f: Vec<String> = vec![
                h.target.target_id.clone(),
                h.target.strand.to_string(),
                h.target.start.to_string(),
                h.target.end.to_string(),
                format!("{:.2}", h.score),
            ];
            f.extend(call.junction.coords().iter().map(|c| c.to_string()));
            f.extend(call.features.to_array().iter().map(|v| v.to_string()));
            f.push(call.label.as_str().to_string());
            f.extend(call.votes.iter().map(|v| v.to_string()));
            let _ = writeln!(out, "{}", f.join("\t"));
        }
    }
    out
}

pub fn format_json(analyses: &[HitAnalysis]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(analyses)?;
    s.push('\n');
    Ok(s)
}

/// Writes `<target>_<start>_<end>_<plus|minus>.ct` per hit and returns the
/// paths in input order.
pub fn write_ct_dir(analyses: &[HitAnalysis], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::with_capacity(analyses.len());
    for a in analyses {
        let t = &a.hit.target;
        let id: String = t
            .target_id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        let strand = match t.strand {
            Strand::Plus => "plus",
            Strand::Minus => "minus",
        };
        let path = dir.join(format!("{id}_{}_{}_{strand}.ct", t.start, t.end));
        std::fs::write(&path, write_ct(&a.ct)).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

/// TSV or JSON text for the analyses; CT files too when `ct_dir` is set.
pub fn emit_machine_output(analyses: &[HitAnalysis], format: OutputFormat, ct_dir: Option<&Path>) -> Result<String> {
    if let Some(dir) = ct_dir {
        write_ct_dir(analyses, dir)?;
    }
    match format {
        OutputFormat::Tsv => Ok(format_tsv(analyses)),
        OutputFormat::Json => format_json(analyses),
        OutputFormat::Text => Err(Error::invalid("text output needs a model; use format_text_report")),
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{genome_with, junction_model, small_forest};
    use super::super::*;
    use super::*;
    use crate::seqio::reverse_complement;
    use crate::structio::parse_ct;

    fn analyses(minus: bool) -> Vec<HitAnalysis> {
        let mut g = genome_with("GGACAACUGGAAACAGAGCAUUCGAAUGCAGUCC");
        if minus {
            g = reverse_complement(&g);
        }
        let cfg = PipelineConfig {
            scan: crate::cmscan::ScanConfig {
                threshold: 15.0,
                ..Default::default()
            },
            ..Default::default()
        };
        run_scan_pipeline(&junction_model(), &g, &small_forest(), &cfg).unwrap()
    }

    #[test]
    fn tsv_has_a_row_per_junction() {
        let mut a = analyses(false);
        let extra = a[0].junctions[0].clone();
        a[0].junctions.push(extra);
        let text = format_tsv(&a);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let cols = lines[0].split('\t').count();
        assert_eq!(cols, 11 + 15 + 1 + 4);
        for l in &lines[1..] {
            assert_eq!(l.split('\t').count(), cols);
        }
        let hit_cols = |l: &str| l.split('\t').take(5).collect::<Vec<_>>().join("\t");
        assert_eq!(hit_cols(lines[1]), hit_cols(lines[2]));
    }

    #[test]
    fn json_round_trip() {
        let a = analyses(false);
        let back: Vec<HitAnalysis> = serde_json::from_str(&format_json(&a).unwrap()).unwrap();
        assert_eq!(back.len(), a.len());
        assert_eq!(back[0].coax_status, a[0].coax_status);
        assert_eq!(back[0].junctions.len(), a[0].junctions.len());
    }

    #[test]
    fn ct_files_carry_genome_coordinates() {
        let a = analyses(true);
        assert!(a.iter().any(|x| x.hit.target.strand == Strand::Minus));
        let dir = tempfile::tempdir().unwrap();
        let text = emit_machine_output(&a, OutputFormat::Tsv, Some(dir.path())).unwrap();
        assert!(text.starts_with("target\tstrand"));
        let paths = write_ct_dir(&a, dir.path()).unwrap();
        assert_eq!(paths.len(), a.len());
        for (p, an) in paths.iter().zip(&a) {
            let ct = parse_ct(&std::fs::read_to_string(p).unwrap()).unwrap();
            assert_eq!(ct.pairs, an.ct.pairs);
            if an.hit.target.strand == Strand::Minus {
                assert!(ct.origin(1) > ct.origin(ct.len()));
                assert_eq!(ct.origin(1), an.hit.target.start as i64);
            }
        }
    }

    #[test]
    fn format_names() {
        assert_eq!("tsv".parse::<OutputFormat>().unwrap(), OutputFormat::Tsv);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
