//! Binary CART classification trees on Gini impurity, with either exhaustive
//! ("best") or Extra-Trees style random thresholds.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    Best,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (p as f64).sqrt().floor() as usize,
            MaxFeatures::All => p,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub split_mode: SplitMode,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            split_mode: SplitMode::Best,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf == 0 {
            return Err(Error::BadConfig("min_samples_leaf must be >= 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::BadConfig("max_depth must be >= 1".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(Error::BadConfig("max_features must be >= 1".into()));
        }
        Ok(())
    }
}

const LEAF: i32 = -1;

/// Flattened tree. Node 0 is the root; `feature[i] == -1` marks a leaf,
/// whose training class counts live in `counts[i]` (empty for split nodes).
/// Rows go left when `x[feature] < threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub n_classes: usize,
    pub feature: Vec<i32>,
    pub threshold: Vec<f64>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub counts: Vec<Vec<u32>>,
    /// Unnormalized weighted impurity decrease per feature; training only.
    #[serde(skip)]
    pub impurity_decrease: Vec<f64>,
}

impl DecisionTree {
    pub fn n_nodes(&self) -> usize {
        self.feature.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.feature.iter().filter(|&&f| f == LEAF).count()
    }

    /// Structural check for trees read from disk: consistent array lengths,
    /// in-range forward children, known features, non-empty leaves.
    pub fn validate(&self) -> Result<()> {
        let n = self.feature.len();
        let bad = |m: String| Err(Error::ModelMismatch(format!("malformed tree: {m}")));
        if n == 0 || [self.threshold.len(), self.left.len(), self.right.len(), self.counts.len()] != [n; 4] {
            return bad("array lengths differ".into());
        }
        for i in 0..n {
            if self.feature[i] == LEAF {
                if self.counts[i].len() != self.n_classes || self.counts[i].iter().all(|&c| c == 0) {
                    return bad(format!("leaf {i} has bad counts"));
                }
            } else {
                let (l, r) = (self.left[i] as usize, self.right[i] as usize);
                if self.feature[i] < 0 || self.feature[i] as usize >= self.n_features {
                    return bad(format!("node {i} splits on unknown feature"));
                }
                if l <= i || r <= i || l >= n || r >= n || !self.threshold[i].is_finite() {
                    return bad(format!("node {i} has bad children"));
                }
            }
        }
        Ok(())
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.feature[node] == LEAF
    }

    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut node = 0usize;
        while self.feature[node] != LEAF {
            let f = self.feature[node] as usize;
            node = if row[f] < self.threshold[node] {
                self.left[node] as usize
            } else {
                self.right[node] as usize
            };
        }
        node
    }

    /// Training class distribution of the leaf `row` lands in.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let counts = &self.counts[self.leaf_index(row)];
        let total: u32 = counts.iter().sum();
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    /// Impurity decreases normalized to sum to 1 (all zeros for a stump-less tree).
    pub fn feature_importances(&self) -> Vec<f64> {
        let total: f64 = self.impurity_decrease.iter().sum();
        if total > 0.0 {
            self.impurity_decrease.iter().map(|v| v / total).collect()
        } else {
            vec![0.0; self.n_features]
        }
    }
}

struct Builder<'a> {
    data: &'a Dataset,
    config: &'a TreeConfig,
    mtry: usize,
    rng: ChaCha8Rng,
    features: Vec<usize>,
    scratch: Vec<(f64, usize)>,
    root_weight: f64,
    tree: DecisionTree,
}

#[derive(Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    /// Σ_left c²/n_left + Σ_right c²/n_right; larger means purer children.
    score: f64,
}

fn class_counts(data: &Dataset, samples: &[usize]) -> Vec<u32> {
    let mut counts = vec![0u32; data.n_classes()];
    for &s in samples {
        counts[data.labels()[s]] += 1;
    }
    counts
}

/// `n * gini` for the given counts.
fn weighted_gini(counts: &[u32]) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    n as f64 - sq / n as f64
}

impl Builder<'_> {
    fn push_node(&mut self) -> usize {
        let t = &mut self.tree;
        t.feature.push(LEAF);
        t.threshold.push(0.0);
        t.left.push(0);
        t.right.push(0);
        t.counts.push(Vec::new());
        t.feature.len() - 1
    }

    fn grow(&mut self, samples: &mut [usize], depth: usize) -> usize {
        let node = self.push_node();
        let counts = class_counts(self.data, samples);
        let n = samples.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_reached = self.config.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || n < 2 * self.config.min_samples_leaf {
            self.tree.counts[node] = counts;
            return node;
        }
        let Some(split) = self.find_split(samples, &counts) else {
            self.tree.counts[node] = counts;
            return node;
        };
        let column = self.data.column(split.feature);
        let mut lo = 0;
        for i in 0..n {
            if column[samples[i]] < split.threshold {
                samples.swap(lo, i);
                lo += 1;
            }
        }
        debug_assert!(lo > 0 && lo < n);
        let (left, right) = samples.split_at_mut(lo);
        let decrease = weighted_gini(&counts)
            - weighted_gini(&class_counts(self.data, left))
            - weighted_gini(&class_counts(self.data, right));
        self.tree.impurity_decrease[split.feature] += decrease / self.root_weight;
        self.tree.feature[node] = split.feature as i32;
        self.tree.threshold[node] = split.threshold;
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.tree.left[node] = l as u32;
        self.tree.right[node] = r as u32;
        node
    }

    /// Draws candidate features without replacement until `mtry` have been
    /// inspected and at least one of them was non-constant in this node.
    fn find_split(&mut self, samples: &[usize], counts: &[u32]) -> Option<Split> {
        let p = self.features.len();
        let mut best: Option<Split> = None;
        let (mut visited, mut informative) = (0, 0);
        for i in 0..p {
            if visited >= self.mtry && informative > 0 {
                break;
            }
            let j = self.rng.random_range(i..p);
            self.features.swap(i, j);
            let f = self.features[i];
            visited += 1;
            let candidate = match self.config.split_mode {
                SplitMode::Best => self.best_threshold(f, samples, counts),
                SplitMode::Random => self.random_threshold(f, samples, counts),
            };
            let Some(candidate) = candidate else { continue };
            informative += 1;
            if let Some(split) = candidate {
                if best.is_none_or(|b| split.score > b.score) {
                    best = Some(split);
                }
            }
        }
        best
    }

    /// Outer `None`: feature constant in the node. Inner `None`: no split
    /// respects `min_samples_leaf`.
    fn best_threshold(&mut self, f: usize, samples: &[usize], counts: &[u32]) -> Option<Option<Split>> {
        let column = self.data.column(f);
        let labels = self.data.labels();
        self.scratch.clear();
        self.scratch.extend(samples.iter().map(|&s| (column[s], labels[s])));
        self.scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let m = self.scratch.len();
        if self.scratch[0].0 == self.scratch[m - 1].0 {
            return None;
        }
        let min_leaf = self.config.min_samples_leaf;
        let mut left = vec![0u32; counts.len()];
        let mut right = counts.to_vec();
        let mut sq_left = 0.0;
        let mut sq_right: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m - 1 {
            let k = self.scratch[i].1;
            sq_left += 2.0 * left[k] as f64 + 1.0;
            sq_right -= 2.0 * right[k] as f64 - 1.0;
            left[k] += 1;
            right[k] -= 1;
            let n_left = i + 1;
            let n_right = m - n_left;
            if n_left < min_leaf || n_right < min_leaf || self.scratch[i].0 == self.scratch[i + 1].0 {
                continue;
            }
            let score = sq_left / n_left as f64 + sq_right / n_right as f64;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        Some(best.map(|(i, score)| {
            let (a, b) = (self.scratch[i].0, self.scratch[i + 1].0);
            let mut threshold = a + (b - a) / 2.0;
            if threshold <= a {
                threshold = b;
            }
            Split { feature: f, threshold, score }
        }))
    }

    fn random_threshold(&mut self, f: usize, samples: &[usize], counts: &[u32]) -> Option<Option<Split>> {
        let column = self.data.column(f);
        let (lo, hi) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(column[s]), hi.max(column[s])));
        if lo == hi {
            return None;
        }
        // uniform in (lo, hi]
        let u: f64 = self.rng.random();
        let mut threshold = hi - u * (hi - lo);
        if threshold <= lo {
            threshold = hi;
        }
        let labels = self.data.labels();
        let mut left = vec![0u32; counts.len()];
        for &s in samples {
            if column[s] < threshold {
                left[labels[s]] += 1;
            }
        }
        let n_left: u32 = left.iter().sum();
        let n_right = samples.len() as u32 - n_left;
        let min_leaf = self.config.min_samples_leaf as u32;
        if n_left < min_leaf || n_right < min_leaf {
            return Some(None);
        }
        let mut sq_left = 0.0;
        let mut sq_right = 0.0;
        for (k, &c) in counts.iter().enumerate() {
            let l = left[k] as f64;
            let r = (c - left[k]) as f64;
            sq_left += l * l;
            sq_right += r * r;
        }
        let score = sq_left / n_left as f64 + sq_right / n_right as f64;
        Some(Some(Split { feature: f, threshold, score }))
    }
}

/// Grows one tree on `samples` (row indices into `data`, repeats allowed).
pub fn train_tree_on(data: &Dataset, samples: &mut [usize], config: &TreeConfig, rng: ChaCha8Rng) -> Result<DecisionTree> {
    config.validate()?;
    if samples.is_empty() || data.n_features() == 0 {
        return Err(Error::EmptyData);
    }
    let p = data.n_features();
    let mut builder = Builder {
        data,
        config,
        mtry: config.max_features.resolve(p),
        rng,
        features: (0..p).collect(),
        scratch: Vec::with_capacity(samples.len()),
        root_weight: samples.len() as f64,
        tree: DecisionTree {
            n_features: p,
            n_classes: data.n_classes(),
            feature: Vec::new(),
            threshold: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            counts: Vec::new(),
            impurity_decrease: vec![0.0; p],
        },
    };
    builder.grow(samples, 0);
    Ok(builder.tree)
}

/// Grows one tree on every row of `data`.
pub fn train_tree(data: &Dataset, config: &TreeConfig, seed: u64) -> Result<DecisionTree> {
    let mut samples: Vec<usize> = (0..data.n_rows()).collect();
    train_tree_on(data, &mut samples, config, seed::rng(seed, &[seed::TAG_TREE]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(split_mode: SplitMode) -> TreeConfig {
        TreeConfig { max_features: MaxFeatures::All, split_mode, ..TreeConfig::default() }
    }

    #[test]
    fn separable_single_feature() {
        let data = Dataset::from_rows(&[0.0, 0.0, 1.0, 1.0], 1, &[1, 1, 2, 2]).unwrap();
        for mode in [SplitMode::Best, SplitMode::Random] {
            let tree = train_tree(&data, &full(mode), 7).unwrap();
            assert_eq!(tree.n_nodes(), 3);
            assert!(tree.threshold[0] > 0.0 && tree.threshold[0] <= 1.0);
            for (i, want) in [(0.0, 0usize), (1.0, 1usize)] {
                let p = tree.predict_proba(&[i]);
                assert_eq!(p[want], 1.0);
            }
            assert_eq!(tree.feature_importances(), vec![1.0]);
        }
    }

    #[test]
    fn pure_input_is_a_leaf() {
        let data = Dataset::from_rows(&[0.0, 3.0, 1.0], 1, &[4, 4, 4]).unwrap();
        let tree = train_tree(&data, &TreeConfig::default(), 1).unwrap();
        assert_eq!(tree.n_nodes(), 1);
        assert_eq!(tree.predict_proba(&[100.0]), vec![1.0]);
        assert_eq!(tree.feature_importances(), vec![0.0]);
    }

    #[test]
    fn deterministic_per_seed() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
        let y: Vec<u8> = (0..40).map(|i| (i % 3 + 1) as u8).collect();
        let data = Dataset::from_rows(&x, 5, &y).unwrap();
        for mode in [SplitMode::Best, SplitMode::Random] {
            let cfg = TreeConfig { split_mode: mode, ..TreeConfig::default() };
            assert_eq!(train_tree(&data, &cfg, 3).unwrap(), train_tree(&data, &cfg, 3).unwrap());
        }
    }

    #[test]
    fn respects_depth_and_leaf_size() {
        let x: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let y: Vec<u8> = (0..60).map(|i| (i % 2 + 1) as u8).collect();
        let data = Dataset::from_rows(&x, 1, &y).unwrap();
        let cfg = TreeConfig { max_depth: Some(2), ..full(SplitMode::Best) };
        let tree = train_tree(&data, &cfg, 0).unwrap();
        assert!(tree.n_leaves() <= 4);
        let cfg = TreeConfig { min_samples_leaf: 7, ..full(SplitMode::Best) };
        let tree = train_tree(&data, &cfg, 0).unwrap();
        for (i, c) in tree.counts.iter().enumerate() {
            if tree.is_leaf(i) {
                assert!(c.iter().sum::<u32>() >= 7);
            }
        }
        assert!(TreeConfig { min_samples_leaf: 0, ..cfg }.validate().is_err());
    }

    #[test]
    fn searches_past_constant_features() {
        // only the last of 9 features is informative; mtry = 3
        let n = 20;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            x.extend_from_slice(&[1.0; 8]);
            x.push(i as f64);
            y.push(if i < 10 { 1 } else { 2 });
        }
        let data = Dataset::from_rows(&x, 9, &y).unwrap();
        for seed in 0..10 {
            let tree = train_tree(&data, &TreeConfig::default(), seed).unwrap();
            assert_eq!(tree.feature[0], 8);
        }
    }
}
