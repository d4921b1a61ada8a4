//! Random forest of CART trees predicting a junction's coaxial stacking.

mod dataset;
mod label;
pub mod synthetic;
mod tree;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};

pub use dataset::{
    load_dataset, parse_dataset_rows, write_dataset, DatasetRow, LabeledExample, Provenance, DATASET_COLUMNS,
};
pub use label::CoaxLabel;
pub use tree::{gini_impurity, train_tree, DecisionTree, Node, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features drawn at each split.
    pub m_try: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            m_try: 4,
            min_leaf: 1,
            seed: 42,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees must be at least 1"));
        }
        if !(1..=FEATURE_COUNT).contains(&self.m_try) {
            return Err(Error::invalid(format!("m_try must be in 1..={FEATURE_COUNT}")));
        }
        if self.min_leaf == 0 {
            return Err(Error::invalid("min_leaf must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub seed: u64,
    /// SHA-256 over feature bits and labels, in sample order.
    pub dataset_sha256: String,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    pub feature_names: BTreeMap<usize, String>,
    pub fingerprint: Fingerprint,
    pub trees: Vec<DecisionTree>,
    /// Per tree, the sample indices left out of its bootstrap.
    pub oob: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: CoaxLabel,
    /// Votes per label in `CoaxLabel::ALL` order.
    pub votes: [u32; 4],
}

pub fn dataset_digest(samples: &[LabeledExample]) -> String {
    let mut h = Sha256::new();
    for s in samples {
        for v in s.features.to_array() {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update([s.label.index() as u8]);
    }
    hex::encode(h.finalize())
}

/// Random stream of tree `t`: one ChaCha8 key per seed, one stream per tree.
fn tree_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

pub fn train_forest(samples: &[LabeledExample], config: &ForestConfig) -> Result<RandomForest> {
    config.validate()?;
    if samples.len() < 2 {
        return Err(Error::invalid("a forest needs at least 2 samples"));
    }
    let rows: Vec<Row> = samples.iter().map(|s| s.features.to_array()).collect();
    let labels: Vec<CoaxLabel> = samples.iter().map(|s| s.label).collect();
    let n = samples.len();
    let grown: Vec<(DecisionTree, Vec<usize>)> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(config.seed, t);
            let boot: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut seen = vec![false; n];
            for &i in &boot {
                seen[i] = true;
            }
            let oob = (0..n).filter(|&i| !seen[i]).collect();
            (tree::train_on(&rows, &labels, &boot, config, &mut rng), oob)
        })
        .collect();
    let (trees, oob) = grown.into_iter().unzip();
    Ok(RandomForest {
        config: *config,
        feature_names: FEATURE_NAMES
            .iter()
            .enumerate()
            .map(|(i, n)| (i, n.to_string()))
            .collect(),
        fingerprint: Fingerprint {
            seed: config.seed,
            dataset_sha256: dataset_digest(samples),
            n_samples: n,
        },
        trees,
        oob,
    })
}

impl RandomForest {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: RandomForest = serde_json::from_str(text)?;
        f.config.validate()?;
        if f.trees.len() != f.config.n_trees || f.oob.len() != f.trees.len() {
            return Err(Error::format("forest", "tree count differs from config"));
        }
        for t in &f.trees {
            for node in &t.nodes {
                if let Node::Split {
                    feature, left, right, ..
                } = node
                {
                    if *feature >= FEATURE_COUNT || *left >= t.nodes.len() || *right >= t.nodes.len() {
                        return Err(Error::format("forest", "split references a missing feature or node"));
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn predict_row(&self, x: &Row) -> Prediction {
        let mut votes = [0u32; 4];
        for t in &self.trees {
            votes[t.predict(x).index()] += 1;
        }
        Prediction {
            label: CoaxLabel::plurality(&votes),
            votes,
        }
    }
}

/// Plurality vote over all trees.
pub fn predict(forest: &RandomForest, fv: &FeatureVector) -> Prediction {
    forest.predict_row(&fv.to_array())
}

/// Accuracy of out-of-bag plurality votes over samples that were left out
/// by at least one tree.
pub fn oob_accuracy(forest: &RandomForest, samples: &[LabeledExample]) -> Result<f64> {
    if samples.len() != forest.fingerprint.n_samples {
        return Err(Error::invalid("samples differ from the training set"));
    }
    let mut votes = vec![[0u32; 4]; samples.len()];
    for (t, oob) in forest.trees.iter().zip(&forest.oob) {
        for &i in oob {
            votes[i][t.predict(&samples[i].features.to_array()).index()] += 1;
        }
    }
    let mut scored = 0usize;
    let mut correct = 0usize;
    for (s, v) in samples.iter().zip(&votes) {
        if v.iter().sum::<u32>() == 0 {
            continue;
        }
        scored += 1;
        if CoaxLabel::plurality(v) == s.label {
            correct += 1;
        }
    }
    if scored == 0 {
        return Err(Error::invalid("no sample is out of bag for any tree"));
    }
    Ok(correct as f64 / scored as f64)
}
