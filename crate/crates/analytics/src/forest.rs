//! Random forest regression.
//!
//! Trees are grown greedily on squared-error reduction over bootstrap samples,
//! with a fresh random feature subset drawn at every split. Training is
//! deterministic for a given seed.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::AnalyticsError;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features considered per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    /// Bootstrap sample size as a fraction of the training set.
    pub bootstrap_ratio: f64,
    /// Smallest training set accepted by [`ForestModel::train`].
    pub min_samples: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 32,
            max_depth: 12,
            min_samples_leaf: 1,
            max_features: None,
            bootstrap_ratio: 1.0,
            min_samples: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TreeNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<TreeNode>,
}

impl RegressionTree {
    /// A tree with a single leaf.
    pub fn leaf(value: f64) -> Self {
        RegressionTree {
            nodes: vec![TreeNode::Leaf(value)],
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf(v) => return *v,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf(_) => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf(_))).count()
    }
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a ForestParams,
    n_features: usize,
    subset: usize,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn grow(&mut self, samples: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|&i| self.y[i]).sum::<f64>() / n;
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf(mean));

        let pure = samples.iter().all(|&i| self.y[i] == self.y[samples[0]]);
        if pure || depth >= self.params.max_depth || samples.len() < 2 * self.params.min_samples_leaf {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(samples, rng) else {
            return id;
        };
        let mut split = 0;
        for i in 0..samples.len() {
            if self.x[samples[i]][feature] <= threshold {
                samples.swap(i, split);
                split += 1;
            }
        }
        let (l, r) = samples.split_at_mut(split);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&self, samples: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = samples.to_vec();
        for feature in index::sample(rng, self.n_features, self.subset) {
            order.sort_by(|&a, &b| self.x[a][feature].total_cmp(&self.x[b][feature]));
            let total: f64 = order.iter().map(|&i| self.y[i]).sum();
            let total_sq: f64 = order.iter().map(|&i| self.y[i] * self.y[i]).sum();
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for k in 1..order.len() {
                let y = self.y[order[k - 1]];
                sum += y;
                sum_sq += y * y;
                let (lo, hi) = (self.x[order[k - 1]][feature], self.x[order[k]][feature]);
                if k < min_leaf || order.len() - k < min_leaf || lo >= hi {
                    continue;
                }
                let (nl, nr) = (k as f64, (order.len() - k) as f64);
                let sse = (sum_sq - sum * sum / nl) + ((total_sq - sum_sq) - (total - sum).powi(2) / nr);
                if best.is_none_or(|(b, _, _)| sse < b) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((sse, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    params: ForestParams,
    trees: Vec<RegressionTree>,
    n_features: usize,
    /// Range of the training responses.
    response_range: (f64, f64),
}

impl ForestModel {
    /// Assembles a model from prebuilt trees.
    pub fn from_trees(trees: Vec<RegressionTree>, n_features: usize) -> Self {
        ForestModel {
            params: ForestParams {
                n_trees: trees.len(),
                ..ForestParams::default()
            },
            trees,
            n_features,
            response_range: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn train(x: &[Vec<f64>], y: &[f64], params: &ForestParams, seed: u64) -> Result<Self, AnalyticsError> {
        if x.len() != y.len() {
            return Err(AnalyticsError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if x.len() < params.min_samples.max(1) {
            return Err(AnalyticsError::TooFewSamples {
                needed: params.min_samples.max(1),
                found: x.len(),
            });
        }
        let n_features = x[0].len();
        if n_features == 0 {
            return Err(AnalyticsError::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(bad) = x.iter().find(|r| r.len() != n_features) {
            return Err(AnalyticsError::DimensionMismatch {
                expected: n_features,
                found: bad.len(),
            });
        }
        if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
            return Err(AnalyticsError::NonFinite);
        }
        let subset = params
            .max_features
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features);
        let bootstrap = ((x.len() as f64 * params.bootstrap_ratio).round() as usize).max(1);

        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let trees = (0..params.n_trees.max(1))
            .map(|_| {
                let mut rng = ChaCha8Rng::seed_from_u64(master.random());
                let mut samples: Vec<usize> = (0..bootstrap).map(|_| rng.random_range(0..x.len())).collect();
                let mut grower = Grower {
                    x,
                    y,
                    params,
                    n_features,
                    subset,
                    nodes: Vec::new(),
                };
                grower.grow(&mut samples, 0, &mut rng);
                RegressionTree { nodes: grower.nodes }
            })
            .collect();
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(ForestModel {
            params: params.clone(),
            trees,
            n_features,
            response_range: (lo, hi),
        })
    }

    /// Mean of the per-tree predictions.
    pub fn predict(&self, x: &[f64]) -> Result<f64, AnalyticsError> {
        if self.trees.is_empty() {
            return Err(AnalyticsError::NotFitted);
        }
        if x.len() != self.n_features {
            return Err(AnalyticsError::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64)
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn response_range(&self) -> (f64, f64) {
        self.response_range
    }
}
