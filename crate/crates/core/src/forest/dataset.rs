use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureVector};
use crate::junction::junction_from_dataset_row;
use crate::thermo::ThermoParams;

use super::CoaxLabel;

pub const DATASET_COLUMNS: [&str; 20] = [
    "Serial", "PDB", "RNAType", "Family", "Coaxial", "S1ID5", "S1ID3", "S2ID5", "S2ID3", "S3ID5", "S3ID3", "J12count",
    "J12bases", "J23count", "J23bases", "J31count", "J31bases", "StrSeq1", "StrSeq2", "StrSeq3",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub serial: String,
    pub pdb: String,
    pub rna_type: String,
    pub family: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub features: FeatureVector,
    pub label: CoaxLabel,
    pub provenance: Option<Provenance>,
}

/// One junction row as stored in the dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub provenance: Provenance,
    pub coaxial: CoaxLabel,
    pub coords: [usize; 6],
    pub strseqs: [String; 3],
}

impl DatasetRow {
    pub fn to_example(&self, params: &ThermoParams) -> Result<LabeledExample> {
        let [a, b, c] = &self.strseqs;
        let j = junction_from_dataset_row(self.coords, [a, b, c])?;
        Ok(LabeledExample {
            features: extract_features(&j, params),
            label: self.coaxial,
            provenance: Some(self.provenance.clone()),
        })
    }
}

fn loop_field(s: &str) -> &str {
    let s = s.trim();
    if s == "-" {
        ""
    } else {
        s
    }
}

/// Parses the tab-separated junction table. Columns are located by header
/// name, so extra columns and any column order are accepted.
pub fn parse_dataset_rows(text: &str) -> Result<Vec<DatasetRow>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| Error::format("dataset", "empty input"))?;
    let names: Vec<&str> = header.split('\t').map(str::trim).collect();
    let mut col = [0usize; 20];
    for (k, want) in DATASET_COLUMNS.iter().enumerate() {
        col[k] = names
            .iter()
            .position(|n| n == want)
            .ok_or_else(|| Error::parse("dataset", hline, format!("missing column {want}")))?;
    }

    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        let err = |msg: String| Error::parse("dataset", lineno, msg);
        let get = |k: usize| -> &str { fields.get(col[k]).map(|s| s.trim()).unwrap_or("") };
        let coaxial: CoaxLabel = get(4).parse().map_err(|e: Error| err(e.to_string()))?;
        let mut coords = [0usize; 6];
        for (i, c) in coords.iter_mut().enumerate() {
            *c = get(5 + i)
                .parse()
                .map_err(|_| err(format!("bad {} '{}'", DATASET_COLUMNS[5 + i], get(5 + i))))?;
        }
        let strseqs = [get(17).to_string(), get(18).to_string(), get(19).to_string()];
        for (k, s) in strseqs.iter().enumerate() {
            if s.len() < 4 {
                return Err(err(format!("StrSeq{} shorter than 4", k + 1)));
            }
            let (count_col, bases_col) = (11 + 2 * k, 12 + 2 * k);
            let count: usize = get(count_col)
                .parse()
                .map_err(|_| err(format!("bad {} '{}'", DATASET_COLUMNS[count_col], get(count_col))))?;
            let bases = loop_field(get(bases_col));
            if count != bases.len() {
                return Err(err(format!(
                    "{} = {count} but {} has {} bases",
                    DATASET_COLUMNS[count_col],
                    DATASET_COLUMNS[bases_col],
                    bases.len()
                )));
            }
            if !s[2..s.len() - 2].eq_ignore_ascii_case(bases) {
                return Err(err(format!(
                    "{} does not match the interior of StrSeq{}",
                    DATASET_COLUMNS[bases_col],
                    k + 1
                )));
            }
        }
        let row = DatasetRow {
            provenance: Provenance {
                serial: get(0).to_string(),
                pdb: get(1).to_string(),
                rna_type: get(2).to_string(),
                family: get(3).to_string(),
            },
            coaxial,
            coords,
            strseqs,
        };
        let [a, b, c] = &row.strseqs;
        let j = junction_from_dataset_row(row.coords, [a, b, c]).map_err(|e| err(e.to_string()))?;
        if !row.provenance.family.is_empty() && row.provenance.family != j.family.to_string() {
            log::warn!(
                "dataset line {lineno}: Family {} differs from loop-count rule ({})",
                row.provenance.family,
                j.family
            );
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn load_dataset(text: &str, params: &ThermoParams) -> Result<Vec<LabeledExample>> {
    parse_dataset_rows(text)?.iter().map(|r| r.to_example(params)).collect()
}

pub fn write_dataset(rows: &[DatasetRow]) -> String {
    let mut out = DATASET_COLUMNS.join("\t");
    out.push('\n');
    for r in rows {
        let p = &r.provenance;
        let coax = match r.coaxial {
            CoaxLabel::None => "",
            l => l.as_str(),
        };
        let _ = write!(out, "{}\t{}\t{}\t{}\t{}", p.serial, p.pdb, p.rna_type, p.family, coax);
        for c in r.coords {
            let _ = write!(out, "\t{c}");
        }
        for s in &r.strseqs {
            let interior = &s[2..s.len() - 2];
            let shown = if interior.is_empty() { "-" } else { interior };
            let _ = write!(out, "\t{}\t{shown}", interior.len());
        }
        let _ = writeln!(out, "\t{}\t{}\t{}", r.strseqs[0], r.strseqs[1], r.strseqs[2]);
    }
    out
}
