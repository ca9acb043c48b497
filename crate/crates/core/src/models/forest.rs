use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_columns, Dataset, Matrix};
use crate::error::{Error, Result};
use crate::math;
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_estimators: usize,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features per split; `None` means `floor(sqrt(n_features))`.
    pub candidates_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            max_depth: None,
            min_samples_split: 2,
            candidates_per_split: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// `[P(class 0), P(class 1)]`.
    Leaf { proba: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(proba: [f64; 2]) -> Self {
        Self {
            nodes: vec![Node::Leaf { proba }],
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> [f64; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { proba } => return *proba,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub n_estimators: usize,
    pub feature_subsample: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

#[derive(Clone, Copy)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl SplitChoice {
    /// Higher gain wins; ties go to the lower feature index, then the lower threshold.
    fn beats(&self, other: &SplitChoice) -> bool {
        if self.gain != other.gain {
            return self.gain > other.gain;
        }
        if self.feature != other.feature {
            return self.feature < other.feature;
        }
        self.threshold < other.threshold
    }
}

fn gini(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (c0 / n, c1 / n);
    1.0 - p0 * p0 - p1 * p1
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    max_depth: Option<usize>,
    min_samples_split: usize,
    candidates: usize,
    scratch: Vec<(f64, u8)>,
}

impl Builder<'_> {
    /// Best threshold on one feature, or `None` if it is constant on `rows`.
    fn best_on_feature(&mut self, rows: &[usize], feature: usize, counts: [f64; 2]) -> Option<SplitChoice> {
        self.scratch.clear();
        self.scratch
            .extend(rows.iter().map(|&r| (self.x.get(r, feature), self.y[r])));
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let first = self.scratch[0].0;
        if self.scratch.last().map(|p| p.0) == Some(first) {
            return None;
        }
        let n = rows.len() as f64;
        let parent = gini(counts[0], counts[1]);
        let mut left = [0.0f64; 2];
        let mut best: Option<SplitChoice> = None;
        for i in 0..self.scratch.len() - 1 {
            left[self.scratch[i].1 as usize] += 1.0;
            let (a, b) = (self.scratch[i].0, self.scratch[i + 1].0);
            if a == b {
                continue;
            }
            let nl = left[0] + left[1];
            let nr = n - nl;
            let gain = parent
                - nl / n * gini(left[0], left[1])
                - nr / n * gini(counts[0] - left[0], counts[1] - left[1]);
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            let cand = SplitChoice {
                feature,
                threshold,
                gain,
            };
            if best.as_ref().is_none_or(|cur| cand.beats(cur)) {
                best = Some(cand);
            }
        }
        best
    }

    fn build<R: Rng>(&mut self, rows: Vec<usize>, rng: &mut R) -> Tree {
        let mut nodes: Vec<Node> = Vec::new();
        // (rows, depth, slot to patch in parent)
        let mut stack: Vec<(Vec<usize>, usize, Option<(usize, bool)>)> = vec![(rows, 0, None)];
        let mut features: Vec<usize> = (0..self.x.cols()).collect();
        while let Some((rows, depth, parent)) = stack.pop() {
            let id = nodes.len();
            if let Some((p, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut nodes[p] {
                    if is_left {
                        *left = id;
                    } else {
                        *right = id;
                    }
                }
            }
            let mut counts = [0.0f64; 2];
            for &r in &rows {
                counts[self.y[r] as usize] += 1.0;
            }
            let n = rows.len() as f64;
            let leaf = Node::Leaf {
                proba: [counts[0] / n, counts[1] / n],
            };
            let pure = counts[0] == 0.0 || counts[1] == 0.0;
            let depth_capped = self.max_depth.is_some_and(|d| depth >= d);
            if pure || rows.len() < self.min_samples_split || depth_capped {
                nodes.push(leaf);
                continue;
            }
            features.shuffle(rng);
            let mut best: Option<SplitChoice> = None;
            let mut evaluated = 0;
            for fi in 0..features.len() {
                if evaluated >= self.candidates {
                    break;
                }
                let f = features[fi];
                if let Some(cand) = self.best_on_feature(&rows, f, counts) {
                    evaluated += 1;
                    if best.as_ref().is_none_or(|cur| cand.beats(cur)) {
                        best = Some(cand);
                    }
                }
            }
            let Some(split) = best else {
                nodes.push(leaf);
                continue;
            };
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&r| self.x.get(r, split.feature) <= split.threshold);
            nodes.push(Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: usize::MAX,
                right: usize::MAX,
            });
            stack.push((right_rows, depth + 1, Some((id, false))));
            stack.push((left_rows, depth + 1, Some((id, true))));
        }
        Tree { nodes }
    }
}

impl ForestModel {
    /// Bagged CART trees; each split considers a fresh random subset of
    /// features and picks the largest Gini impurity decrease.
    pub fn train(data: &Dataset, cfg: &ForestConfig) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::TooFewRows {
                needed: 2,
                got: data.len(),
            });
        }
        data.require_both_classes()?;
        let n_features = data.n_features();
        let candidates = cfg
            .candidates_per_split
            .unwrap_or_else(|| math::floor(math::sqrt(n_features as f64)) as usize)
            .clamp(1, n_features);
        let mut builder = Builder {
            x: data.x(),
            y: data.y(),
            max_depth: cfg.max_depth,
            min_samples_split: cfg.min_samples_split.max(2),
            candidates,
            scratch: Vec::with_capacity(data.len()),
        };
        let n = data.len();
        let trees = (0..cfg.n_estimators)
            .map(|t| {
                let mut rng = rng_from(derive_seed(cfg.seed, t as u64));
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                builder.build(rows, &mut rng)
            })
            .collect();
        Ok(Self {
            trees,
            n_features,
            n_estimators: cfg.n_estimators,
            feature_subsample: candidates,
            max_depth: cfg.max_depth,
            min_samples_split: cfg.min_samples_split,
            seed: cfg.seed,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Mean leaf probability of class 1 across trees.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_columns(self.n_features, x)?;
        if self.trees.is_empty() {
            return Err(Error::EmptyInput);
        }
        let k = self.trees.len() as f64;
        Ok(x.iter_rows()
            .map(|row| self.trees.iter().map(|t| t.predict_row(row)[1]).sum::<f64>() / k)
            .collect())
    }
}
