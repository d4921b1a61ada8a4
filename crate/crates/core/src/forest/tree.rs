use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FEATURE_COUNT;

use super::{CoaxLabel, ForestConfig, LabeledExample};

pub type Row = [f64; FEATURE_COUNT];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    /// Values `<= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: CoaxLabel,
        counts: [u32; 4],
    },
}

/// CART classifier stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf(label: CoaxLabel) -> Self {
        let mut counts = [0; 4];
        counts[label.index()] = 1;
        Self {
            nodes: vec![Node::Leaf { label, counts }],
        }
    }

    pub fn predict(&self, x: &Row) -> CoaxLabel {
        match &self.nodes[self.route(x, |_| {})] {
            Node::Leaf { label, .. } => *label,
            Node::Split { .. } => unreachable!("route ends at a leaf"),
        }
    }

    /// Index of the leaf reached by `x`; `visit` sees every tested feature.
    pub fn route(&self, x: &Row, mut visit: impl FnMut(usize)) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    visit(*feature);
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn gini_counts(counts: &[u32; 4], n: u32) -> f64 {
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

pub fn gini_impurity(labels: &[CoaxLabel]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::invalid("gini impurity of an empty set"));
    }
    let mut counts = [0u32; 4];
    for l in labels {
        counts[l.index()] += 1;
    }
    Ok(gini_counts(&counts, labels.len() as u32))
}

struct Builder<'a, R> {
    rows: &'a [Row],
    labels: &'a [CoaxLabel],
    config: &'a ForestConfig,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

struct Best {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl<R: Rng> Builder<'_, R> {
    fn counts(&self, idx: &[usize]) -> [u32; 4] {
        let mut c = [0u32; 4];
        for &i in idx {
            c[self.labels[i].index()] += 1;
        }
        c
    }

    fn best_split(&mut self, idx: &[usize], parent: f64) -> Option<Best> {
        let n = idx.len() as u32;
        let features = sample(self.rng, FEATURE_COUNT, self.config.m_try);
        let mut best: Option<Best> = None;
        let mut order = idx.to_vec();
        for f in features.iter() {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            let mut left = [0u32; 4];
            let total = self.counts(&order);
            for k in 0..order.len() - 1 {
                left[self.labels[order[k]].index()] += 1;
                let (lo, hi) = (self.rows[order[k]][f], self.rows[order[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let nl = k as u32 + 1;
                let nr = n - nl;
                let mut right = total;
                for c in 0..4 {
                    right[c] -= left[c];
                }
                let impurity = (nl as f64 * gini_counts(&left, nl) + nr as f64 * gini_counts(&right, nr)) / n as f64;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(Best {
                        feature: f,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best.filter(|b| b.impurity < parent)
    }

    fn grow(&mut self, idx: &[usize]) -> usize {
        let counts = self.counts(idx);
        let n = idx.len() as u32;
        let parent = gini_counts(&counts, n);
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf {
            label: CoaxLabel::plurality(&counts),
            counts,
        });
        if parent == 0.0 || idx.len() <= self.config.min_leaf {
            return me;
        }
        let Some(best) = self.best_split(idx, parent) else {
            return me;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.rows[i][best.feature] <= best.threshold);
        let left = self.grow(&l);
        let right = self.grow(&r);
        self.nodes[me] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        me
    }
}

/// Grows one tree on the rows selected by `idx` (repeats allowed).
pub(crate) fn train_on(
    rows: &[Row],
    labels: &[CoaxLabel],
    idx: &[usize],
    config: &ForestConfig,
    rng: &mut impl Rng,
) -> DecisionTree {
    assert!(!idx.is_empty(), "tree needs at least one sample");
    let mut b = Builder {
        rows,
        labels,
        config,
        rng,
        nodes: Vec::new(),
    };
    b.grow(idx);
    DecisionTree { nodes: b.nodes }
}

/// Grows a CART tree on every sample.
pub fn train_tree(samples: &[LabeledExample], config: &ForestConfig, rng: &mut impl Rng) -> Result<DecisionTree> {
    if samples.is_empty() {
        return Err(Error::invalid("cannot train a tree on zero samples"));
    }
    config.validate()?;
    let rows: Vec<Row> = samples.iter().map(|s| s.features.to_array()).collect();
    let labels: Vec<CoaxLabel> = samples.iter().map(|s| s.label).collect();
    let idx: Vec<usize> = (0..samples.len()).collect();
    Ok(train_on(&rows, &labels, &idx, config, rng))
}
