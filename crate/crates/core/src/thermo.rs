//! Nearest-neighbor stacking parameters used for coaxial free energies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PAIR_TYPES: [&str; 6] = ["AU", "CG", "GC", "UA", "GU", "UG"];

const DEFAULT_PARAMS: &str = include_str!("../data/rna_stack.params");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoParams {
    /// Keyed `(XY, ZW)` for the stack 5'-XZ-3' / 3'-YW-5'.
    wc_stack: BTreeMap<(String, String), f64>,
    pub loop_open: f64,
    pub loop_per_nt: f64,
}

impl Default for ThermoParams {
    fn default() -> Self {
        parse_thermo_params(DEFAULT_PARAMS).expect("shipped parameter file is valid")
    }
}

impl ThermoParams {
    /// Stack energy for pair `XY` followed by pair `ZW`, or `None` when
    /// either pair is non-canonical.
    pub fn stack(&self, xy: [u8; 2], zw: [u8; 2]) -> Option<f64> {
        let k = (pair_key(xy)?, pair_key(zw)?);
        self.wc_stack.get(&k).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.wc_stack.iter().map(|((a, b), &e)| (a.as_str(), b.as_str(), e))
    }
}

fn pair_key(p: [u8; 2]) -> Option<String> {
    let s: String = p.iter().map(|b| b.to_ascii_uppercase() as char).collect();
    PAIR_TYPES.contains(&s.as_str()).then_some(s)
}

/// The same stack read from the opposite strand: 5'XZ3'/3'YW5' is also
/// 5'WY3'/3'ZX5'.
fn rotated(xy: &str, zw: &str) -> (String, String) {
    let (x, y) = (&xy[0..1], &xy[1..2]);
    let (z, w) = (&zw[0..1], &zw[1..2]);
    (format!("{w}{z}"), format!("{y}{x}"))
}

/// Parses `pair5' pair3' energy` lines plus `loop_open` and `loop_per_nt`
/// keys. Missing entries are filled from their strand-rotated counterpart;
/// the table must end up covering all 36 pair combinations.
pub fn parse_thermo_params(text: &str) -> Result<ThermoParams> {
    let mut table: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut loop_open = None;
    let mut loop_per_nt = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse("params", lineno, format!("bad number '{s}'")))
        };
        match cols.as_slice() {
            ["loop_open", v] => loop_open = Some(num(v)?),
            ["loop_per_nt", v] => loop_per_nt = Some(num(v)?),
            [a, b, v] => {
                let (a, b) = (a.to_ascii_uppercase(), b.to_ascii_uppercase());
                if !PAIR_TYPES.contains(&a.as_str()) || !PAIR_TYPES.contains(&b.as_str()) {
                    return Err(Error::parse("params", lineno, format!("unknown pair '{a} {b}'")));
                }
                let e = num(v)?;
                if let Some(old) = table.insert((a.clone(), b.clone()), e) {
                    if old != e {
                        return Err(Error::parse("params", lineno, format!("duplicate entry {a} {b}")));
                    }
                }
            }
            _ => return Err(Error::parse("params", lineno, "expected '<pair> <pair> <energy>'")),
        }
    }
    for ((a, b), e) in table.clone() {
        let r = rotated(&a, &b);
        match table.get(&r) {
            Some(&other) if other != e => {
                return Err(Error::format(
                    "params",
                    format!("{a} {b} = {e} conflicts with {} {} = {other}", r.0, r.1),
                ))
            }
            Some(_) => {}
            None => {
                table.insert(r, e);
            }
        }
    }
    for a in PAIR_TYPES {
        for b in PAIR_TYPES {
            if !table.contains_key(&(a.to_string(), b.to_string())) {
                return Err(Error::format("params", format!("missing stack {a} {b}")));
            }
        }
    }
    Ok(ThermoParams {
        wc_stack: table,
        loop_open: loop_open.ok_or_else(|| Error::format("params", "missing loop_open"))?,
        loop_per_nt: loop_per_nt.ok_or_else(|| Error::format("params", "missing loop_per_nt"))?,
    })
}
