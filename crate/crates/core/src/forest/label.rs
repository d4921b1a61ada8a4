use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which pair of helices shares a common axis. Variant order is the
/// tie-break order used by leaves and votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CoaxLabel {
    H1H2,
    H1H3,
    H2H3,
    #[serde(rename = "NONE")]
    None,
}

impl CoaxLabel {
    pub const ALL: [CoaxLabel; 4] = [CoaxLabel::H1H2, CoaxLabel::H1H3, CoaxLabel::H2H3, CoaxLabel::None];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> CoaxLabel {
        Self::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CoaxLabel::H1H2 => "H1H2",
            CoaxLabel::H1H3 => "H1H3",
            CoaxLabel::H2H3 => "H2H3",
            CoaxLabel::None => "NONE",
        }
    }

    /// Plurality over per-class counts; ties go to the earlier label.
    pub fn plurality(counts: &[u32; 4]) -> CoaxLabel {
        let mut best = 0;
        for k in 1..4 {
            if counts[k] > counts[best] {
                best = k;
            }
        }
        Self::ALL[best]
    }
}

impl fmt::Display for CoaxLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoaxLabel {
    type Err = Error;

    /// Empty and `-` mean no stacking.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H1H2" => Ok(CoaxLabel::H1H2),
            "H1H3" => Ok(CoaxLabel::H1H3),
            "H2H3" => Ok(CoaxLabel::H2H3),
            "" | "-" | "NONE" => Ok(CoaxLabel::None),
            other => Err(Error::invalid(format!("unknown coaxial label '{other}'"))),
        }
    }
}
