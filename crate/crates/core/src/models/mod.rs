//! Tree induction, forests, naive Bayes, voting and the feature-subset
//! ensemble.

pub mod dataset;
pub mod ensemble;
pub mod forest;
pub mod naive_bayes;
pub mod tree;
pub mod vote;

use std::collections::HashMap;

pub use dataset::Dataset;
pub use ensemble::{
    train_ensemble, Composition, EnsembleConfig, EnsembleMember, EnsembleModel, Leaderboard,
    LeaderboardEntry,
};
pub use forest::{train_forest, ForestConfig, ForestKind, ForestModel};
pub use naive_bayes::{train_gaussian_nb, GaussianNb};
pub use tree::{train_tree, DecisionTree, MaxFeatures, SplitMode, TreeConfig};
pub use vote::majority_vote;

use crate::error::Result;
use crate::features::{FeatureMatrix, RowMeta};
use crate::ingest::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPrediction {
    pub label: Label,
    /// Probability per class, aligned with the classifier's `classes()`.
    pub proba: Vec<f64>,
}

/// Anything that labels the rows of a feature matrix.
pub trait SegmentClassifier: Send + Sync {
    fn classes(&self) -> &[Label];
    fn predict_segments(&self, m: &FeatureMatrix) -> Result<Vec<SegmentPrediction>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialVote {
    pub trial_id: String,
    pub label: Label,
    pub segment_labels: Vec<Label>,
}

/// Groups segment predictions by trial (first-appearance order) and applies
/// the plurality / summed-probability / smallest-label ladder per trial.
pub fn vote_trials(meta: &[RowMeta], preds: &[SegmentPrediction], classes: &[Label]) -> Vec<TrialVote> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, m) in meta.iter().enumerate() {
        groups
            .entry(m.trial_id.as_str())
            .or_insert_with(|| {
                order.push(m.trial_id.as_str());
                Vec::new()
            })
            .push(i);
    }
    order
        .into_iter()
        .map(|trial| {
            let rows = &groups[trial];
            let labels: Vec<Label> = rows.iter().map(|&i| preds[i].label).collect();
            let probas: Vec<Vec<f64>> = rows.iter().map(|&i| preds[i].proba.clone()).collect();
            TrialVote {
                trial_id: trial.to_string(),
                label: majority_vote(&labels, &probas, classes),
                segment_labels: labels,
            }
        })
        .collect()
}

impl SegmentClassifier for GaussianNb {
    fn classes(&self) -> &[Label] {
        &self.classes
    }

    fn predict_segments(&self, m: &FeatureMatrix) -> Result<Vec<SegmentPrediction>> {
        Ok((0..m.n_rows())
            .map(|i| SegmentPrediction {
                label: self.predict(m.row(i)),
                proba: self.predict_proba(m.row(i)),
            })
            .collect())
    }
}

/// Naive Bayes bound to named feature columns.
#[derive(Debug, Clone)]
pub struct NamedNb {
    pub features: Vec<String>,
    pub model: GaussianNb,
}

impl SegmentClassifier for NamedNb {
    fn classes(&self) -> &[Label] {
        &self.model.classes
    }

    fn predict_segments(&self, m: &FeatureMatrix) -> Result<Vec<SegmentPrediction>> {
        self.model.predict_segments(&m.select_columns(&self.features)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(trial: &str) -> RowMeta {
        RowMeta { trial_id: trial.into(), subject_id: "S1".into(), label: None }
    }

    fn pred(label: Label) -> SegmentPrediction {
        SegmentPrediction { label, proba: vec![0.25; 4] }
    }

    #[test]
    fn trial_plurality() {
        let m = vec![meta("a"), meta("b"), meta("a"), meta("a"), meta("c")];
        let p = vec![pred(1), pred(4), pred(1), pred(2), pred(3)];
        let votes = vote_trials(&m, &p, &[1, 2, 3, 4]);
        assert_eq!(votes.len(), 3);
        assert_eq!((votes[0].trial_id.as_str(), votes[0].label), ("a", 1));
        assert_eq!(votes[0].segment_labels, vec![1, 1, 2]);
        assert_eq!(votes[1].label, 4);
        assert_eq!(votes[2].label, 3);
    }
}
