//! The five-member voting ensemble. Every (forest kind, feature subset) pair
//! is a candidate; candidates are ranked by trial-level k-fold accuracy and
//! the best five are refit on all rows.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::forest::{train_forest, ForestConfig, ForestKind, ForestModel};
use super::tree::MaxFeatures;
use super::{majority_vote, vote_trials, SegmentClassifier, SegmentPrediction};
use crate::error::{Error, Result};
use crate::evaluation::{kfold_splits, trial_infos};
use crate::features::{FeatureMatrix, FeatureSubset};
use crate::ingest::Label;
use crate::seed;

pub const ENSEMBLE_SIZE: usize = 5;
pub const MIN_TRAINING_TRIALS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    /// Best five candidates regardless of kind.
    Top,
    /// Best four Random Forests plus the best Extra-Trees model.
    FourRfOneEt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Trees per member of the final ensemble.
    pub n_trees: usize,
    /// Trees per forest while scoring candidates.
    pub cv_trees: usize,
    pub cv_folds: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub kinds: [bool; 2],
    pub composition: Composition,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_trees: 300,
            cv_trees: 100,
            cv_folds: 10,
            max_depth: None,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            kinds: [true, true],
            composition: Composition::Top,
        }
    }
}

impl EnsembleConfig {
    fn forest(&self, kind: ForestKind, n_trees: usize) -> ForestConfig {
        ForestConfig {
            kind,
            n_trees,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: self.max_features,
        }
    }

    fn candidate_kinds(&self) -> Vec<ForestKind> {
        let mut kinds = Vec::new();
        if self.kinds[0] {
            kinds.push(ForestKind::RandomForest);
        }
        if self.kinds[1] {
            kinds.push(ForestKind::ExtraTrees);
        }
        kinds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub rank: usize,
    pub kind: ForestKind,
    pub subset_index: usize,
    pub cv_accuracy: f64,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Leaderboard {
    pub entries: Vec<LeaderboardEntry>,
}

impl Leaderboard {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,kind,subset,cv_accuracy,selected\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.rank,
                e.kind,
                e.subset_index,
                e.cv_accuracy,
                u8::from(e.selected)
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub kind: ForestKind,
    pub subset_index: usize,
    pub cv_accuracy: f64,
    pub features: Vec<String>,
    pub forest: ForestModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub classes: Vec<Label>,
    pub members: Vec<EnsembleMember>,
}

impl EnsembleModel {
    /// Every feature some member reads, in first-use order.
    pub fn used_features(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for m in &self.members {
            for f in &m.features {
                if seen.insert(f.as_str()) {
                    out.push(f.clone());
                }
            }
        }
        out
    }
}

impl SegmentClassifier for EnsembleModel {
    fn classes(&self) -> &[Label] {
        &self.classes
    }

    /// Per row: each member votes, the ladder picks the label, and the
    /// reported distribution is the mean of the member distributions.
    fn predict_segments(&self, m: &FeatureMatrix) -> Result<Vec<SegmentPrediction>> {
        let columns = self
            .members
            .iter()
            .map(|mem| m.column_indices(&mem.features))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..m.n_rows())
            .map(|i| {
                let row = m.row(i);
                let mut labels = Vec::with_capacity(self.members.len());
                let mut probas = Vec::with_capacity(self.members.len());
                for (mem, cols) in self.members.iter().zip(&columns) {
                    let x: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
                    let p = mem.forest.predict_proba(&x);
                    labels.push(mem.forest.classes[super::forest::argmax(&p)]);
                    probas.push(p);
                }
                let mut mean = vec![0.0; self.classes.len()];
                for p in &probas {
                    for (a, v) in mean.iter_mut().zip(p) {
                        *a += v;
                    }
                }
                mean.iter_mut().for_each(|a| *a /= probas.len() as f64);
                SegmentPrediction {
                    label: majority_vote(&labels, &probas, &self.classes),
                    proba: mean,
                }
            })
            .collect())
    }
}

struct Candidate {
    kind: ForestKind,
    subset: usize,
}

/// Trains and scores every candidate, then refits the chosen five on all rows.
pub fn train_ensemble(
    matrix: &FeatureMatrix,
    subsets: &[FeatureSubset],
    config: &EnsembleConfig,
    seed: u64,
) -> Result<(EnsembleModel, Leaderboard)> {
    let labels = matrix.labels()?;
    let classes: BTreeSet<Label> = labels.iter().copied().collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let trials = trial_infos(matrix);
    if trials.len() < MIN_TRAINING_TRIALS.max(config.cv_folds) {
        return Err(Error::TooFewTrials {
            found: trials.len(),
            needed: MIN_TRAINING_TRIALS.max(config.cv_folds),
        });
    }
    let kinds = config.candidate_kinds();
    let candidates: Vec<Candidate> = subsets
        .iter()
        .flat_map(|s| kinds.iter().map(move |&kind| Candidate { kind, subset: s.index }))
        .collect();
    if candidates.len() < ENSEMBLE_SIZE {
        return Err(Error::BadConfig(format!(
            "{} candidates cannot fill a {ENSEMBLE_SIZE}-member ensemble",
            candidates.len()
        )));
    }
    let subset_cols = subsets
        .iter()
        .map(|s| matrix.column_indices(&s.features))
        .collect::<Result<Vec<_>>>()?;
    let subset_pos = |index: usize| subsets.iter().position(|s| s.index == index).expect("known subset");

    let plan = kfold_splits(&trials, config.cv_folds, seed::derive(seed, &[seed::TAG_FOLD]))?;
    let folds: Vec<(Vec<usize>, Vec<usize>)> = plan
        .folds
        .iter()
        .map(|f| {
            let train: BTreeSet<String> = f.train.iter().cloned().collect();
            let test: BTreeSet<String> = f.test.iter().cloned().collect();
            (matrix.rows_for_trials(&train), matrix.rows_for_trials(&test))
        })
        .collect();

    let units: Vec<(usize, usize)> = (0..candidates.len())
        .flat_map(|c| (0..folds.len()).map(move |f| (c, f)))
        .collect();
    let outcomes = units
        .par_iter()
        .map(|&(c, f)| -> Result<(usize, usize)> {
            let cand = &candidates[c];
            let cols = &subset_cols[subset_pos(cand.subset)];
            let (train_rows, test_rows) = &folds[f];
            let data = Dataset::from_matrix_subset(matrix, train_rows, cols)?;
            let forest = train_forest(
                &data,
                &config.forest(cand.kind, config.cv_trees),
                seed::derive(seed, &[seed::TAG_CANDIDATE, c as u64, f as u64]),
            )?;
            let preds: Vec<SegmentPrediction> = test_rows
                .iter()
                .map(|&i| {
                    let row = matrix.row(i);
                    let x: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
                    let proba = forest.predict_proba(&x);
                    SegmentPrediction { label: forest.classes[super::forest::argmax(&proba)], proba }
                })
                .collect();
            let meta: Vec<_> = test_rows.iter().map(|&i| matrix.meta()[i].clone()).collect();
            let votes = vote_trials(&meta, &preds, &forest.classes);
            let truth = |trial: &str| meta.iter().find(|m| m.trial_id == trial).and_then(|m| m.label);
            let correct = votes.iter().filter(|v| truth(&v.trial_id) == Some(v.label)).count();
            Ok((correct, votes.len()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut scored: Vec<(usize, f64)> = (0..candidates.len())
        .map(|c| {
            let (correct, total) = outcomes[c * folds.len()..(c + 1) * folds.len()]
                .iter()
                .fold((0, 0), |(a, b), &(x, y)| (a + x, b + y));
            (c, correct as f64 / total as f64)
        })
        .collect();
    scored.sort_by(|a, b| {
        let (ca, cb) = (&candidates[a.0], &candidates[b.0]);
        b.1.total_cmp(&a.1)
            .then(ca.subset.cmp(&cb.subset))
            .then(ca.kind.cmp(&cb.kind))
    });

    let chosen: Vec<usize> = match config.composition {
        Composition::Top => scored.iter().take(ENSEMBLE_SIZE).map(|&(c, _)| c).collect(),
        Composition::FourRfOneEt => {
            let of_kind = |kind: ForestKind, n: usize| -> Vec<usize> {
                scored.iter().filter(|&&(c, _)| candidates[c].kind == kind).take(n).map(|&(c, _)| c).collect()
            };
            let mut picks = of_kind(ForestKind::RandomForest, ENSEMBLE_SIZE - 1);
            picks.extend(of_kind(ForestKind::ExtraTrees, 1));
            if picks.len() != ENSEMBLE_SIZE {
                return Err(Error::BadConfig("4rf1et composition needs both forest kinds".into()));
            }
            // keep leaderboard order
            scored.iter().map(|&(c, _)| c).filter(|c| picks.contains(c)).collect()
        }
    };

    let leaderboard = Leaderboard {
        entries: scored
            .iter()
            .enumerate()
            .map(|(rank, &(c, acc))| LeaderboardEntry {
                rank: rank + 1,
                kind: candidates[c].kind,
                subset_index: candidates[c].subset,
                cv_accuracy: acc,
                selected: chosen.contains(&c),
            })
            .collect(),
    };

    let all_rows: Vec<usize> = (0..matrix.n_rows()).collect();
    let members = chosen
        .par_iter()
        .map(|&c| -> Result<EnsembleMember> {
            let cand = &candidates[c];
            let pos = subset_pos(cand.subset);
            let data = Dataset::from_matrix_subset(matrix, &all_rows, &subset_cols[pos])?;
            let forest = train_forest(
                &data,
                &config.forest(cand.kind, config.n_trees),
                seed::derive(seed, &[seed::TAG_CANDIDATE, c as u64, u64::MAX]),
            )?;
            Ok(EnsembleMember {
                kind: cand.kind,
                subset_index: cand.subset,
                cv_accuracy: scored.iter().find(|s| s.0 == c).map(|s| s.1).unwrap_or(0.0),
                features: subsets[pos].features.clone(),
                forest,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((
        EnsembleModel {
            classes: classes.into_iter().collect(),
            members,
        },
        leaderboard,
    ))
}
