//! Structural profile search: a simplified covariance model built from a
//! Stockholm alignment, scored against genomes with CYK.

mod cyk;
mod model;
mod scan;

pub use cyk::{cyk_align, score_columns, AlignConfig, Alignment, AlnColumn};
pub use model::{build_cm, residue_code, BuildConfig, CmNode, CovarianceModel, GapPenalties, MIN_LOG_ODDS};
pub use scan::{scan_genome, traceback_to_structure, ScanConfig, ScanHit};
