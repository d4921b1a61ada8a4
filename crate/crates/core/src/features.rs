//! The fifteen junction features used by the stacking classifier.

use serde::{Deserialize, Serialize};

use crate::junction::{BasePair, LoopRegion, ThreeWayJunction};
use crate::thermo::ThermoParams;

pub const FEATURE_COUNT: usize = 15;

/// Feature names in vector order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "J12",
    "J23",
    "J13",
    "Min(J12,J23,J13)",
    "Med(J12,J23,J13)",
    "Max(J12,J23,J13)",
    "Min(J23,J13)",
    "Min(J12,J13)",
    "Min(J12,J23)",
    "A(J12)",
    "A(J23)",
    "A(J13)",
    "ΔG(H1,H2)",
    "ΔG(H2,H3)",
    "ΔG(H1,H3)",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub j12: u32,
    pub j23: u32,
    pub j13: u32,
    pub min_all: u32,
    pub med_all: u32,
    pub max_all: u32,
    pub min_2313: u32,
    pub min_1213: u32,
    pub min_1223: u32,
    pub a_j12: u32,
    pub a_j23: u32,
    pub a_j13: u32,
    pub dg_h1h2: f64,
    pub dg_h2h3: f64,
    pub dg_h1h3: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.j12 as f64,
            self.j23 as f64,
            self.j13 as f64,
            self.min_all as f64,
            self.med_all as f64,
            self.max_all as f64,
            self.min_2313 as f64,
            self.min_1213 as f64,
            self.min_1223 as f64,
            self.a_j12 as f64,
            self.a_j23 as f64,
            self.a_j13 as f64,
            self.dg_h1h2,
            self.dg_h2h3,
            self.dg_h1h3,
        ]
    }

    pub fn get(&self, index: usize) -> f64 {
        self.to_array()[index]
    }

    /// `name<TAB>value` lines; ΔG values with two decimals.
    pub fn to_table(&self) -> String {
        let values = self.to_array();
        let mut out = String::new();
        for (k, (name, v)) in FEATURE_NAMES.iter().zip(values).enumerate() {
            if k >= 12 {
                out.push_str(&format!("{name}\t{v:.2}\n"));
            } else {
                out.push_str(&format!("{name}\t{v}\n"));
            }
        }
        out
    }
}

/// Length of the longest run of `A` in the loop.
pub fn max_consecutive_adenines(lp: &LoopRegion) -> u32 {
    let mut best = 0;
    let mut run = 0;
    for c in lp.bases.chars() {
        if c.eq_ignore_ascii_case(&'A') {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Positions `(p, q)` with `q = p + 1`, `p` in one pair and `q` in the
/// other; the two pairs flank an empty loop at this junction step.
fn flush_step(a: &BasePair, b: &BasePair, lp: &LoopRegion) -> Option<(BasePair, usize, BasePair, usize)> {
    let ends = |x: &BasePair| [x.five_prime, x.three_prime];
    let hinted = lp.start.checked_sub(1);
    let mut found = None;
    for (up, down) in [(a, b), (b, a)] {
        for p in ends(up) {
            if ends(down).contains(&(p + 1)) {
                if Some(p) == hinted {
                    return Some((*up, p, *down, p + 1));
                }
                found.get_or_insert((*up, p, *down, p + 1));
            }
        }
    }
    found
}

/// Free energy of stacking two helix ends across a junction loop.
///
/// An empty loop is scored as a flush stack: with `X` the upstream
/// terminal base next to the loop and `Z` the downstream one, the value is
/// the stack table entry for 5'-XZ-3' / 3'-YW-5'. A non-empty loop costs
/// `loop_open + loop_per_nt * len` instead.
pub fn coax_delta_g(ha_terminal: &BasePair, hb_terminal: &BasePair, lp: &LoopRegion, params: &ThermoParams) -> f64 {
    if !lp.is_empty() {
        return params.loop_open + params.loop_per_nt * lp.len() as f64;
    }
    let Some((up, p, down, q)) = flush_step(ha_terminal, hb_terminal, lp) else {
        log::warn!("terminal pairs {ha_terminal} and {hb_terminal} are not adjacent across an empty loop");
        return 0.0;
    };
    let partner = |bp: &BasePair, pos: usize| {
        if bp.five_prime == pos {
            bp.three_prime
        } else {
            bp.five_prime
        }
    };
    let x = up.base_at(p) as u8;
    let y = up.base_at(partner(&up, p)) as u8;
    let z = down.base_at(q) as u8;
    let w = down.base_at(partner(&down, q)) as u8;
    params.stack([x, y], [z, w]).unwrap_or(0.0)
}

pub fn extract_features(j: &ThreeWayJunction, params: &ThermoParams) -> FeatureVector {
    let (j12, j23, j13) = (j.j12.len() as u32, j.j23.len() as u32, j.j31.len() as u32);
    let mut sorted = [j12, j23, j13];
    sorted.sort_unstable();
    FeatureVector {
        j12,
        j23,
        j13,
        min_all: sorted[0],
        med_all: sorted[1],
        max_all: sorted[2],
        min_2313: j23.min(j13),
        min_1213: j12.min(j13),
        min_1223: j12.min(j23),
        a_j12: max_consecutive_adenines(&j.j12),
        a_j23: max_consecutive_adenines(&j.j23),
        a_j13: max_consecutive_adenines(&j.j31),
        dg_h1h2: coax_delta_g(&j.h1.terminal, &j.h2.terminal, &j.j12, params),
        dg_h2h3: coax_delta_g(&j.h2.terminal, &j.h3.terminal, &j.j23, params),
        dg_h1h3: coax_delta_g(&j.h1.terminal, &j.h3.terminal, &j.j31, params),
    }
}
