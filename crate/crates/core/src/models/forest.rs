//! Random Forest (bootstrap + best splits) and Extra-Trees (full sample +
//! random thresholds) ensembles of [`DecisionTree`]s.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use super::dataset::Dataset;
use super::tree::{train_tree_on, DecisionTree, MaxFeatures, SplitMode, TreeConfig};
use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ForestKind {
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "ET")]
    ExtraTrees,
}

impl ForestKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ForestKind::RandomForest => "RF",
            ForestKind::ExtraTrees => "ET",
        }
    }
}

impl fmt::Display for ForestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub kind: ForestKind,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl ForestConfig {
    pub fn new(kind: ForestKind, n_trees: usize) -> Self {
        ForestConfig {
            kind,
            n_trees,
            max_depth: None,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
        }
    }

    pub fn random_forest(n_trees: usize) -> Self {
        Self::new(ForestKind::RandomForest, n_trees)
    }

    pub fn extra_trees(n_trees: usize) -> Self {
        Self::new(ForestKind::ExtraTrees, n_trees)
    }

    pub fn bootstrap(&self) -> bool {
        self.kind == ForestKind::RandomForest
    }

    pub fn tree_config(&self) -> TreeConfig {
        TreeConfig {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: self.max_features,
            split_mode: match self.kind {
                ForestKind::RandomForest => SplitMode::Best,
                ForestKind::ExtraTrees => SplitMode::Random,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub kind: ForestKind,
    pub classes: Vec<Label>,
    pub feature_names: Vec<String>,
    pub bootstrap: bool,
    pub seed: u64,
    pub trees: Vec<DecisionTree>,
}

pub fn train_forest(data: &Dataset, config: &ForestConfig, seed: u64) -> Result<ForestModel> {
    if config.n_trees == 0 {
        return Err(Error::BadConfig("n_trees must be >= 1".into()));
    }
    if data.n_rows() == 0 {
        return Err(Error::EmptyData);
    }
    let tree_config = config.tree_config();
    tree_config.validate()?;
    let n = data.n_rows();
    let bootstrap = config.bootstrap();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed, &[seed::TAG_TREE, t as u64]);
            let mut samples: Vec<usize> = if bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            train_tree_on(data, &mut samples, &tree_config, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        kind: config.kind,
        classes: data.classes().to_vec(),
        feature_names: data.names().to_vec(),
        bootstrap,
        seed,
        trees,
    })
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Mean of the member trees' leaf class distributions; `row` is in
    /// `feature_names` order.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.classes.len()];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.predict_proba(row)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// Most probable class; ties go to the smallest label.
    pub fn predict(&self, row: &[f64]) -> Label {
        let proba = self.predict_proba(row);
        self.classes[argmax(&proba)]
    }

    /// MDI: per-tree normalized impurity decreases averaged over the trees
    /// that split at least once, renormalized to sum to 1.
    pub fn feature_importances(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_features()];
        let mut used = 0usize;
        for tree in &self.trees {
            if tree.n_nodes() > 1 {
                used += 1;
                for (a, v) in acc.iter_mut().zip(tree.feature_importances()) {
                    *a += v;
                }
            }
        }
        if used == 0 {
            return acc;
        }
        let total: f64 = acc.iter().sum();
        if total > 0.0 {
            acc.iter_mut().for_each(|a| *a /= total);
        }
        acc
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Two Gaussian blobs far apart along every axis.
    fn blobs(n: usize, p: usize, seed: u64) -> (Vec<f64>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let class = (i % 2) as u8;
            for _ in 0..p {
                x.push(if class == 0 { -5.0 } else { 5.0 } + noise.sample(&mut rng));
            }
            y.push(class + 1);
        }
        (x, y)
    }

    #[test]
    fn blobs_are_learned() {
        let (x, y) = blobs(100, 4, 1);
        let data = Dataset::from_rows(&x, 4, &y).unwrap();
        for cfg in [ForestConfig::random_forest(25), ForestConfig::extra_trees(25)] {
            let forest = train_forest(&data, &cfg, 9).unwrap();
            let correct = (0..100).filter(|&i| forest.predict(&data.row(i)) == y[i]).count();
            assert!(correct as f64 / 100.0 >= 0.99);
        }
    }

    #[test]
    fn proba_is_mean_of_trees() {
        let (x, y) = blobs(60, 3, 2);
        let data = Dataset::from_rows(&x, 3, &y).unwrap();
        let forest = train_forest(&data, &ForestConfig::random_forest(11), 4).unwrap();
        for i in 0..60 {
            let row = data.row(i);
            let mut want = vec![0.0; 2];
            for t in &forest.trees {
                for (w, p) in want.iter_mut().zip(t.predict_proba(&row)) {
                    *w += p;
                }
            }
            want.iter_mut().for_each(|w| *w /= 11.0);
            let got = forest.predict_proba(&row);
            assert_eq!(got, want);
            assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn et_and_rf_differ() {
        let (x, y) = blobs(40, 3, 3);
        let data = Dataset::from_rows(&x, 3, &y).unwrap();
        let rf = train_forest(&data, &ForestConfig::random_forest(1), 5).unwrap();
        let et = train_forest(&data, &ForestConfig::extra_trees(1), 5).unwrap();
        assert!(!rf.bootstrap || rf.trees != et.trees);
        assert_ne!(serde_json::to_string(&rf.trees).unwrap(), serde_json::to_string(&et.trees).unwrap());
    }

    #[test]
    fn perfect_feature_gets_all_importance() {
        let n = 40;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let class = (i % 2) as u8;
            x.push(class as f64 * 10.0 + (i as f64) * 0.01);
            x.extend_from_slice(&[3.0, -1.0, 0.5, 0.5, 2.0]);
            y.push(class + 1);
        }
        let data = Dataset::from_rows(&x, 6, &y).unwrap();
        let forest = train_forest(&data, &ForestConfig::random_forest(50), 0).unwrap();
        let imp = forest.feature_importances();
        assert_eq!(imp[0], 1.0);
        assert!(imp[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn importances_normalized_and_deterministic() {
        let (x, y) = blobs(80, 6, 4);
        let data = Dataset::from_rows(&x, 6, &y).unwrap();
        let a = train_forest(&data, &ForestConfig::random_forest(30), 8).unwrap();
        let b = train_forest(&data, &ForestConfig::random_forest(30), 8).unwrap();
        assert_eq!(a, b);
        let imp = a.feature_importances();
        assert!(imp.iter().all(|&v| v >= 0.0));
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn serde_round_trip_predicts_identically() {
        let (x, y) = blobs(50, 3, 6);
        let data = Dataset::from_rows(&x, 3, &y).unwrap();
        let forest = train_forest(&data, &ForestConfig::extra_trees(10), 1).unwrap();
        let text = serde_json::to_string(&forest).unwrap();
        let back: ForestModel = serde_json::from_str(&text).unwrap();
        for i in 0..50 {
            assert_eq!(back.predict_proba(&data.row(i)), forest.predict_proba(&data.row(i)));
        }
    }

    #[test]
    fn rejects_zero_trees() {
        let data = Dataset::from_rows(&[0.0, 1.0], 1, &[1, 2]).unwrap();
        assert!(train_forest(&data, &ForestConfig::random_forest(0), 0).is_err());
    }
}
