//! Secondary-structure formats: connectivity tables, WUSS / dot-bracket
//! strings and Stockholm alignments.

mod ct;
mod pair_table;
mod stockholm;
mod wuss;

pub use ct::{parse_ct, write_ct, CtRecord};
pub use pair_table::PairTable;
pub use stockholm::{is_gap, parse_stockholm, AlignedRow, StockholmAlignment, GAP_SYMBOLS};
pub use wuss::parse_wuss;
