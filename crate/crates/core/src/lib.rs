//! Genome-wide search for RNA three-way junctions and prediction of their
//! coaxial helical stacking.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`cmscan`] builds a profile stochastic context-free grammar from a
//!    Stockholm alignment and scans both strands of a genome with CYK.
//! 2. [`junction`] extracts three-way junctions from the secondary structure
//!    of each hit.
//! 3. [`features`] turns every junction into a fixed 15-value feature vector.
//! 4. [`forest`] classifies the feature vector with a random forest.
//!
//! [`pipeline`] glues the stages together and renders reports.

pub mod cli;
pub mod cmscan;
pub mod error;
pub mod features;
pub mod forest;
pub mod junction;
pub mod pipeline;
pub mod seqio;
pub mod structio;
pub mod thermo;

pub use error::{Error, Result};
