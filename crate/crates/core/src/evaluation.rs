//! Trial-level cross-validation: stratified k-fold, leave-one-subject-out and
//! leave-one-trial-out plans, confusion matrices and report files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::ingest::Label;
use crate::models::{vote_trials, Leaderboard, SegmentClassifier};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Kfold,
    Loso,
    Loto,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Kfold => "kfold",
            Scheme::Loso => "loso",
            Scheme::Loto => "loto",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kfold" => Ok(Scheme::Kfold),
            "loso" => Ok(Scheme::Loso),
            "loto" => Ok(Scheme::Loto),
            other => Err(Error::BadConfig(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialInfo {
    pub trial_id: String,
    pub subject_id: String,
    pub label: Option<Label>,
}

/// Distinct trials of a matrix in first-appearance order.
pub fn trial_infos(m: &FeatureMatrix) -> Vec<TrialInfo> {
    let mut seen = BTreeSet::new();
    m.meta()
        .iter()
        .filter(|r| seen.insert(r.trial_id.as_str()))
        .map(|r| TrialInfo {
            trial_id: r.trial_id.clone(),
            subject_id: r.subject_id.clone(),
            label: r.label,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub scheme: Scheme,
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    fn from_test_sets(scheme: Scheme, trials: &[TrialInfo], tests: Vec<Vec<String>>) -> FoldPlan {
        let folds = tests
            .into_iter()
            .map(|mut test| {
                test.sort();
                let held: BTreeSet<&String> = test.iter().collect();
                let mut train: Vec<String> = trials
                    .iter()
                    .map(|t| t.trial_id.clone())
                    .filter(|t| !held.contains(t))
                    .collect();
                train.sort();
                Fold { train, test }
            })
            .collect();
        FoldPlan { scheme, folds }
    }

    /// Every trial is tested exactly once and never trained on in the same
    /// fold; for subject-wise plans no subject straddles a fold.
    pub fn check_leakage(&self, trials: &[TrialInfo]) -> Result<()> {
        let all: BTreeSet<&str> = trials.iter().map(|t| t.trial_id.as_str()).collect();
        let subject: BTreeMap<&str, &str> =
            trials.iter().map(|t| (t.trial_id.as_str(), t.subject_id.as_str())).collect();
        let mut tested = BTreeSet::new();
        for (i, fold) in self.folds.iter().enumerate() {
            let train: BTreeSet<&str> = fold.train.iter().map(String::as_str).collect();
            let test: BTreeSet<&str> = fold.test.iter().map(String::as_str).collect();
            let leak = |msg: String| Err(Error::BadConfig(format!("fold {i}: {msg}")));
            if test.is_empty() {
                return leak("empty test set".into());
            }
            if let Some(t) = train.intersection(&test).next() {
                return leak(format!("trial {t} on both sides"));
            }
            if train.len() + test.len() != all.len() || train.union(&test).any(|t| !all.contains(t)) {
                return leak("train and test do not partition the trials".into());
            }
            for t in &test {
                if !tested.insert(*t) {
                    return leak(format!("trial {t} tested twice"));
                }
            }
            if self.scheme == Scheme::Loso {
                let test_subjects: BTreeSet<&str> = test.iter().map(|t| subject[t]).collect();
                if let Some(t) = train.iter().find(|t| test_subjects.contains(subject[*t])) {
                    return leak(format!("subject {} on both sides", subject[t]));
                }
            }
        }
        if tested.len() != all.len() {
            return Err(Error::BadConfig("some trials are never tested".into()));
        }
        Ok(())
    }
}

/// Stratified trial-level k-fold. Trials are shuffled within each label, the
/// labels are concatenated in ascending order, and trial `i` of that sequence
/// goes to fold `i mod k`.
pub fn kfold_splits(trials: &[TrialInfo], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || trials.len() < k {
        return Err(Error::TooFewTrials { found: trials.len(), needed: k.max(2) });
    }
    let mut by_label: BTreeMap<Label, Vec<String>> = BTreeMap::new();
    for t in trials {
        let label = t.label.ok_or_else(|| Error::Unlabeled(t.trial_id.clone()))?;
        by_label.entry(label).or_default().push(t.trial_id.clone());
    }
    let mut sequence = Vec::with_capacity(trials.len());
    for (label, mut ids) in by_label {
        ids.sort();
        ids.shuffle(&mut seed::rng(seed, &[seed::TAG_FOLD, label as u64]));
        sequence.extend(ids);
    }
    let mut tests = vec![Vec::new(); k];
    for (i, id) in sequence.into_iter().enumerate() {
        tests[i % k].push(id);
    }
    let plan = FoldPlan::from_test_sets(Scheme::Kfold, trials, tests);
    plan.check_leakage(trials)?;
    Ok(plan)
}

pub fn loso_splits(trials: &[TrialInfo]) -> Result<FoldPlan> {
    let mut by_subject: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for t in trials {
        by_subject.entry(t.subject_id.as_str()).or_default().push(t.trial_id.clone());
    }
    if by_subject.len() < 2 {
        return Err(Error::SingleSubject);
    }
    let plan = FoldPlan::from_test_sets(Scheme::Loso, trials, by_subject.into_values().collect());
    plan.check_leakage(trials)?;
    Ok(plan)
}

pub fn loto_splits(trials: &[TrialInfo]) -> Result<FoldPlan> {
    if trials.len() < 2 {
        return Err(Error::TooFewTrials { found: trials.len(), needed: 2 });
    }
    let mut ids: Vec<String> = trials.iter().map(|t| t.trial_id.clone()).collect();
    ids.sort();
    let plan = FoldPlan::from_test_sets(Scheme::Loto, trials, ids.into_iter().map(|t| vec![t]).collect());
    plan.check_leakage(trials)?;
    Ok(plan)
}

pub fn fold_plan(trials: &[TrialInfo], scheme: Scheme, k: usize, seed: u64) -> Result<FoldPlan> {
    match scheme {
        Scheme::Kfold => kfold_splits(trials, k, seed),
        Scheme::Loso => loso_splits(trials),
        Scheme::Loto => loto_splits(trials),
    }
}

/// Rows are true labels, columns predicted, both in ascending label order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<Label>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.trace() as f64 / n as f64,
        }
    }

    pub fn get(&self, truth: Label, pred: Label) -> u64 {
        let i = self.classes.binary_search(&truth);
        let j = self.classes.binary_search(&pred);
        match (i, j) {
            (Ok(i), Ok(j)) => self.counts[i][j],
            _ => 0,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for c in &self.classes {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for (i, c) in self.classes.iter().enumerate() {
            out.push_str(&c.to_string());
            for v in &self.counts[i] {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `classes` fixes the minimum label set; labels seen in the data are added.
pub fn confusion_matrix(truth: &[Label], pred: &[Label], classes: &[Label]) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch(truth.len(), pred.len()));
    }
    let all: BTreeSet<Label> = classes.iter().chain(truth).chain(pred).copied().collect();
    let classes: Vec<Label> = all.into_iter().collect();
    let mut counts = vec![vec![0u64; classes.len()]; classes.len()];
    for (t, p) in truth.iter().zip(pred) {
        let i = classes.binary_search(t).expect("present");
        let j = classes.binary_search(p).expect("present");
        counts[i][j] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

/// What a fold's fitting step hands back to the harness.
pub struct FittedFold {
    pub model: Box<dyn SegmentClassifier>,
    pub baseline: Option<Box<dyn SegmentClassifier>>,
    pub leaderboard: Option<Leaderboard>,
    pub selected_features: Vec<String>,
}

impl FittedFold {
    pub fn bare(model: Box<dyn SegmentClassifier>) -> Self {
        FittedFold { model, baseline: None, leaderboard: None, selected_features: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub fold: usize,
    pub trial_id: String,
    pub truth: Label,
    pub predicted: Label,
    pub baseline: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub index: usize,
    pub n_train_trials: usize,
    pub n_test_trials: usize,
    pub accuracy: f64,
    pub segment_accuracy: f64,
    pub baseline_accuracy: Option<f64>,
    pub selected_features: Vec<String>,
    pub leaderboard: Option<Leaderboard>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scheme: Scheme,
    pub folds: Vec<FoldReport>,
    pub outcomes: Vec<TrialOutcome>,
    pub pooled_accuracy: f64,
    pub segment_accuracy: f64,
    pub baseline_pooled_accuracy: Option<f64>,
    pub confusion: ConfusionMatrix,
    pub baseline_confusion: Option<ConfusionMatrix>,
}

struct FoldResult {
    report: FoldReport,
    outcomes: Vec<TrialOutcome>,
    segment_hits: (usize, usize),
}

fn run_fold<F>(matrix: &FeatureMatrix, fold_index: usize, train_ids: &[String], test_ids: &[String], fit: &F) -> Result<FoldResult>
where
    F: Fn(&FeatureMatrix, usize) -> Result<FittedFold> + Sync,
{
    let train: BTreeSet<String> = train_ids.iter().cloned().collect();
    let test: BTreeSet<String> = test_ids.iter().cloned().collect();
    let train_m = matrix.select_rows(&matrix.rows_for_trials(&train));
    let test_m = matrix.select_rows(&matrix.rows_for_trials(&test));
    let fitted = fit(&train_m, fold_index)?;

    let preds = fitted.model.predict_segments(&test_m)?;
    let truth = test_m.labels()?;
    let segment_correct = preds.iter().zip(&truth).filter(|(p, t)| p.label == **t).count();
    let votes = vote_trials(test_m.meta(), &preds, fitted.model.classes());
    let baseline_votes = match &fitted.baseline {
        Some(b) => Some(vote_trials(test_m.meta(), &b.predict_segments(&test_m)?, b.classes())),
        None => None,
    };
    let trial_truth: BTreeMap<&str, Label> = test_m
        .meta()
        .iter()
        .map(|m| (m.trial_id.as_str(), m.label.expect("labels checked")))
        .collect();
    let outcomes: Vec<TrialOutcome> = votes
        .iter()
        .enumerate()
        .map(|(i, v)| TrialOutcome {
            fold: fold_index,
            trial_id: v.trial_id.clone(),
            truth: trial_truth[v.trial_id.as_str()],
            predicted: v.label,
            baseline: baseline_votes.as_ref().map(|b| b[i].label),
        })
        .collect();
    let n = outcomes.len();
    let acc = |hits: usize| if n == 0 { 0.0 } else { hits as f64 / n as f64 };
    let report = FoldReport {
        index: fold_index,
        n_train_trials: train.len(),
        n_test_trials: n,
        accuracy: acc(outcomes.iter().filter(|o| o.predicted == o.truth).count()),
        segment_accuracy: segment_correct as f64 / truth.len().max(1) as f64,
        baseline_accuracy: baseline_votes
            .as_ref()
            .map(|_| acc(outcomes.iter().filter(|o| o.baseline == Some(o.truth)).count())),
        selected_features: fitted.selected_features,
        leaderboard: fitted.leaderboard,
    };
    Ok(FoldResult { report, outcomes, segment_hits: (segment_correct, truth.len()) })
}

/// Runs `fit` on the training side of every fold and scores trial-level
/// votes on the test side. `fit` only ever sees training rows.
pub fn evaluate_plan<F>(matrix: &FeatureMatrix, plan: &FoldPlan, fit: F) -> Result<EvalReport>
where
    F: Fn(&FeatureMatrix, usize) -> Result<FittedFold> + Sync,
{
    matrix.labels()?;
    let trials = trial_infos(matrix);
    plan.check_leakage(&trials)?;
    let results = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(i, fold)| run_fold(matrix, i, &fold.train, &fold.test, &fit))
        .collect::<Result<Vec<_>>>()?;

    let mut folds = Vec::new();
    let mut outcomes = Vec::new();
    let (mut seg_hits, mut seg_total) = (0, 0);
    for r in results {
        log::info!(
            "fold {}: accuracy {:.3} on {} trials, {} selected features",
            r.report.index,
            r.report.accuracy,
            r.report.n_test_trials,
            r.report.selected_features.len()
        );
        seg_hits += r.segment_hits.0;
        seg_total += r.segment_hits.1;
        folds.push(r.report);
        outcomes.extend(r.outcomes);
    }
    let classes: Vec<Label> = trials.iter().filter_map(|t| t.label).collect::<BTreeSet<_>>().into_iter().collect();
    let truth: Vec<Label> = outcomes.iter().map(|o| o.truth).collect();
    let pred: Vec<Label> = outcomes.iter().map(|o| o.predicted).collect();
    let confusion = confusion_matrix(&truth, &pred, &classes)?;
    let baseline_confusion = if outcomes.iter().all(|o| o.baseline.is_some()) && !outcomes.is_empty() {
        let b: Vec<Label> = outcomes.iter().map(|o| o.baseline.expect("checked")).collect();
        Some(confusion_matrix(&truth, &b, &classes)?)
    } else {
        None
    };
    Ok(EvalReport {
        scheme: plan.scheme,
        pooled_accuracy: confusion.accuracy(),
        segment_accuracy: seg_hits as f64 / seg_total.max(1) as f64,
        baseline_pooled_accuracy: baseline_confusion.as_ref().map(ConfusionMatrix::accuracy),
        folds,
        outcomes,
        confusion,
        baseline_confusion,
    })
}

#[derive(Serialize)]
struct Summary<'a> {
    scheme: Scheme,
    n_folds: usize,
    n_trials: usize,
    pooled_accuracy: f64,
    segment_accuracy: f64,
    baseline_pooled_accuracy: Option<f64>,
    folds: Vec<FoldSummary<'a>>,
}

#[derive(Serialize)]
struct FoldSummary<'a> {
    index: usize,
    n_train_trials: usize,
    n_test_trials: usize,
    accuracy: f64,
    segment_accuracy: f64,
    baseline_accuracy: Option<f64>,
    ensemble: Vec<String>,
    selected_features: &'a [String],
}

impl EvalReport {
    /// Writes `summary.json`, `confusion.csv`, `leaderboard.csv` and
    /// `predictions.csv` into `dir`, creating it if needed.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        let summary = Summary {
            scheme: self.scheme,
            n_folds: self.folds.len(),
            n_trials: self.outcomes.len(),
            pooled_accuracy: self.pooled_accuracy,
            segment_accuracy: self.segment_accuracy,
            baseline_pooled_accuracy: self.baseline_pooled_accuracy,
            folds: self
                .folds
                .iter()
                .map(|f| FoldSummary {
                    index: f.index,
                    n_train_trials: f.n_train_trials,
                    n_test_trials: f.n_test_trials,
                    accuracy: f.accuracy,
                    segment_accuracy: f.segment_accuracy,
                    baseline_accuracy: f.baseline_accuracy,
                    ensemble: f
                        .leaderboard
                        .iter()
                        .flat_map(|l| &l.entries)
                        .filter(|e| e.selected)
                        .map(|e| format!("{}#{}", e.kind, e.subset_index))
                        .collect(),
                    selected_features: &f.selected_features,
                })
                .collect(),
        };
        write("summary.json", serde_json::to_string_pretty(&summary)? + "\n")?;
        write("confusion.csv", self.confusion.to_csv())?;
        if let Some(b) = &self.baseline_confusion {
            write("baseline_confusion.csv", b.to_csv())?;
        }
        let mut board = String::from("fold,rank,kind,subset,cv_accuracy,selected\n");
        for f in &self.folds {
            if let Some(l) = &f.leaderboard {
                for line in l.to_csv().lines().skip(1) {
                    board.push_str(&format!("{},{line}\n", f.index));
                }
            }
        }
        write("leaderboard.csv", board)?;
        let mut preds = String::from("fold,trial_id,true_label,predicted_label,baseline_label\n");
        for o in &self.outcomes {
            let b = o.baseline.map(|l| l.to_string()).unwrap_or_default();
            preds.push_str(&format!("{},{},{},{},{b}\n", o.fold, o.trial_id, o.truth, o.predicted));
        }
        write("predictions.csv", preds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::RowMeta;
    use crate::models::SegmentPrediction;

    fn trials(subjects: usize, classes: usize, reps: usize) -> Vec<TrialInfo> {
        let mut out = Vec::new();
        for s in 0..subjects {
            for c in 0..classes {
                for r in 0..reps {
                    out.push(TrialInfo {
                        trial_id: format!("S{s}_A{c}_T{r}"),
                        subject_id: format!("S{s}"),
                        label: Some((c + 1) as Label),
                    });
                }
            }
        }
        out
    }

    #[test]
    fn kfold_balanced_counts() {
        let t = trials(3, 10, 5);
        let plan = kfold_splits(&t, 10, 42).unwrap();
        assert_eq!(plan.folds.len(), 10);
        let label: BTreeMap<&str, Label> = t.iter().map(|x| (x.trial_id.as_str(), x.label.unwrap())).collect();
        for fold in &plan.folds {
            assert_eq!(fold.test.len(), 15);
            let mut per_class = BTreeMap::new();
            for id in &fold.test {
                *per_class.entry(label[id.as_str()]).or_insert(0) += 1;
            }
            assert!(per_class.values().all(|&c| (1..=2).contains(&c)));
        }
        // per class, fold counts differ by at most one
        for c in 1..=10u8 {
            let counts: Vec<usize> = plan
                .folds
                .iter()
                .map(|f| f.test.iter().filter(|id| label[id.as_str()] == c).count())
                .collect();
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
        assert_eq!(plan, kfold_splits(&t, 10, 42).unwrap());
        assert_ne!(plan, kfold_splits(&t, 10, 43).unwrap());
    }

    #[test]
    fn kfold_degenerate_and_errors() {
        let t = trials(2, 2, 3);
        let plan = kfold_splits(&t, t.len(), 0).unwrap();
        assert!(plan.folds.iter().all(|f| f.test.len() == 1));
        assert!(matches!(kfold_splits(&t, 13, 0), Err(Error::TooFewTrials { .. })));
        let mut unlabeled = t.clone();
        unlabeled[0].label = None;
        assert!(matches!(kfold_splits(&unlabeled, 3, 0), Err(Error::Unlabeled(_))));
    }

    #[test]
    fn loso_folds() {
        let plan = loso_splits(&trials(3, 2, 2)).unwrap();
        assert_eq!(plan.folds.len(), 3);
        let mut t = trials(1, 2, 5);
        t.extend(trials(2, 1, 5).into_iter().filter(|x| x.subject_id == "S1"));
        let plan = loso_splits(&t).unwrap();
        let sizes: Vec<usize> = plan.folds.iter().map(|f| f.test.len()).collect();
        assert_eq!(sizes, vec![10, 5]);
        assert!(matches!(loso_splits(&trials(1, 3, 2)), Err(Error::SingleSubject)));
    }

    #[test]
    fn leakage_detected() {
        let t = trials(2, 2, 2);
        let mut plan = loso_splits(&t).unwrap();
        let dup = plan.folds[0].test[0].clone();
        plan.folds[0].train.push(dup);
        assert!(plan.check_leakage(&t).is_err());
        let mut plan = loto_splits(&t).unwrap();
        plan.folds.pop();
        assert!(plan.check_leakage(&t).is_err());
        let mut plan = kfold_splits(&t, 2, 1).unwrap();
        let moved = plan.folds[0].test.pop().unwrap();
        plan.folds[1].test.push(moved);
        assert!(plan.check_leakage(&t).is_err());
    }

    #[test]
    fn confusion_examples() {
        let cm = confusion_matrix(&[1, 1, 2], &[1, 2, 2], &[]).unwrap();
        assert_eq!((cm.get(1, 1), cm.get(1, 2), cm.get(2, 2), cm.get(2, 1)), (1, 1, 1, 0));
        let diag = confusion_matrix(&[3, 1, 2], &[3, 1, 2], &[]).unwrap();
        assert_eq!(diag.trace(), diag.total());
        let empty = confusion_matrix(&[], &[], &(1..=10).collect::<Vec<_>>()).unwrap();
        assert_eq!((empty.classes.len(), empty.total()), (10, 0));
        assert!(confusion_matrix(&[1], &[], &[]).is_err());
        assert!(cm.to_csv().starts_with("true\\pred,1,2\n1,1,1\n2,0,1\n"));
    }

    /// Labels every row from its own metadata, or with one fixed label.
    struct Stub(Option<Label>, Vec<Label>);

    impl SegmentClassifier for Stub {
        fn classes(&self) -> &[Label] {
            &self.1
        }
        fn predict_segments(&self, m: &FeatureMatrix) -> Result<Vec<SegmentPrediction>> {
            Ok(m.meta()
                .iter()
                .map(|r| SegmentPrediction {
                    label: self.0.unwrap_or_else(|| r.label.unwrap()),
                    proba: vec![0.1; 10],
                })
                .collect())
        }
    }

    fn segment_matrix(t: &[TrialInfo]) -> FeatureMatrix {
        let mut meta = Vec::new();
        for info in t {
            for _ in 0..3 {
                meta.push(RowMeta {
                    trial_id: info.trial_id.clone(),
                    subject_id: info.subject_id.clone(),
                    label: info.label,
                });
            }
        }
        let n = meta.len();
        FeatureMatrix::new(vec!["f".into()], (0..n).map(|i| i as f64).collect(), meta).unwrap()
    }

    #[test]
    fn stub_classifiers() {
        let t = trials(3, 10, 5);
        let m = segment_matrix(&t);
        let classes: Vec<Label> = (1..=10).collect();
        let plan = kfold_splits(&t, 10, 1).unwrap();
        let perfect = evaluate_plan(&m, &plan, |_, _| Ok(FittedFold::bare(Box::new(Stub(None, classes.clone()))))).unwrap();
        assert_eq!(perfect.pooled_accuracy, 1.0);
        assert_eq!(perfect.confusion.trace(), 150);
        assert_eq!(perfect.confusion.total(), 150);
        let constant = evaluate_plan(&m, &plan, |_, _| Ok(FittedFold::bare(Box::new(Stub(Some(4), classes.clone()))))).unwrap();
        assert!((constant.pooled_accuracy - 0.1).abs() < 1e-12);
        assert_eq!(constant.confusion.total(), 150);
        let independent = constant.outcomes.iter().filter(|o| o.truth == o.predicted).count();
        assert_eq!(constant.pooled_accuracy, independent as f64 / 150.0);
    }

    #[test]
    fn fit_sees_training_rows_only() {
        let t = trials(3, 2, 2);
        let m = segment_matrix(&t);
        let plan = loso_splits(&t).unwrap();
        let classes = vec![1, 2];
        evaluate_plan(&m, &plan, |train, fold| {
            let subjects: BTreeSet<&str> = train.meta().iter().map(|r| r.subject_id.as_str()).collect();
            assert_eq!(subjects.len(), 2);
            assert!(!subjects.contains(format!("S{fold}").as_str()));
            Ok(FittedFold::bare(Box::new(Stub(None, classes.clone()))))
        })
        .unwrap();
    }
}
