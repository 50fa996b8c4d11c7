//! End-to-end orchestration: manifest to feature matrix, fitting (selection,
//! subsets, ensemble), model files, trial prediction and evaluation.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_plan, fold_plan, trial_infos, EvalReport, FittedFold, Scheme};
use crate::features::{
    build_feature_matrix, chi_square_scores, mdi_importances, partition_feature_subsets, select_features,
    FeatureMatrix, FeatureSubset, SelectionReport,
};
use crate::ingest::{load_trial, Label, Manifest, MarkerSchema, Trial};
use crate::models::{
    train_ensemble, train_gaussian_nb, vote_trials, Dataset, EnsembleModel, ForestKind, Leaderboard, NamedNb,
    SegmentClassifier, TrialVote,
};
use crate::seed;
use crate::streams::StreamCatalog;
use crate::windowing::{segment_trial, Segment, SegmentSpec};

pub const MODEL_FORMAT: &str = "mocap-har-model";
pub const MODEL_VERSION: u32 = 1;

/// Loads and repairs every manifest trial, in manifest order.
pub fn load_trials(manifest: &Manifest, schema: &MarkerSchema, config: &PipelineConfig) -> Result<Vec<Arc<Trial>>> {
    manifest
        .rows
        .par_iter()
        .map(|row| load_trial(row, schema, config.sample_rate_hz, config.max_missing_fraction).map(Arc::new))
        .collect()
}

pub fn segment_trials(trials: &[Arc<Trial>], spec: &SegmentSpec) -> Vec<Segment> {
    trials.iter().flat_map(|t| segment_trial(t, spec)).collect()
}

/// Segment feature matrix of a whole manifest.
pub fn manifest_matrix(manifest: &Manifest, config: &PipelineConfig, catalog: &StreamCatalog) -> Result<FeatureMatrix> {
    catalog.validate()?;
    let trials = load_trials(manifest, &catalog.schema, config)?;
    let segments = segment_trials(&trials, &config.segment_spec()?);
    log::info!("{} trials, {} segments", trials.len(), segments.len());
    build_feature_matrix(&segments, catalog)
}

/// Everything learned from one training matrix.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub selection: SelectionReport,
    pub subsets: Vec<FeatureSubset>,
    pub ensemble: EnsembleModel,
    pub leaderboard: Leaderboard,
    pub baseline: Option<NamedNb>,
}

/// Filter scores, MDI probe, selection, subsets and the ensemble, all on
/// `matrix` alone.
pub fn fit(matrix: &FeatureMatrix, config: &PipelineConfig, seed: u64) -> Result<Fitted> {
    let chi2 = chi_square_scores(matrix)?;
    let probe = config.forest(ForestKind::RandomForest, config.probe_trees);
    let mdi = mdi_importances(matrix, &probe, seed::derive(seed, &[seed::TAG_PROBE]))?;
    let selection = select_features(matrix.names(), &chi2, &mdi, config.feature_target)?;
    let subsets = partition_feature_subsets(&selection.selected, config.subset_count, config.subset_size)?;
    let (ensemble, leaderboard) = train_ensemble(matrix, &subsets, &config.ensemble(), seed)?;
    let baseline = if config.baseline {
        let data = Dataset::from_matrix(&matrix.select_columns(&selection.selected)?)?;
        Some(NamedNb { features: selection.selected.clone(), model: train_gaussian_nb(&data)? })
    } else {
        None
    };
    Ok(Fitted { selection, subsets, ensemble, leaderboard, baseline })
}

/// The self-describing model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub config: PipelineConfig,
    pub catalog: StreamCatalog,
    pub segment: SegmentSpec,
    pub classes: Vec<Label>,
    pub selected_features: Vec<String>,
    pub subsets: Vec<FeatureSubset>,
    pub leaderboard: Leaderboard,
    pub ensemble: EnsembleModel,
}

impl ModelFile {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ModelFile = serde_json::from_str(text)?;
        if m.format != MODEL_FORMAT || m.version != MODEL_VERSION {
            return Err(Error::ModelMismatch(format!(
                "unsupported model format {} v{}",
                m.format, m.version
            )));
        }
        for member in &m.ensemble.members {
            for tree in &member.forest.trees {
                tree.validate()?;
            }
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn predict_trial(&self, trial: Trial) -> Result<TrialVote> {
        predict_trial(&self.ensemble, Arc::new(trial), &self.catalog, &self.segment)
    }

    /// Predicts every manifest trial, in manifest order.
    pub fn predict_manifest(&self, manifest: &Manifest) -> Result<Vec<TrialVote>> {
        let trials = load_trials(manifest, &self.catalog.schema, &self.config)?;
        trials
            .into_par_iter()
            .map(|t| predict_trial(&self.ensemble, t, &self.catalog, &self.segment))
            .collect()
    }
}

/// Writes to a temporary file in the target directory, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Segments one trial, labels each segment with the ensemble vote and takes
/// the plurality over segments.
pub fn predict_trial(
    model: &EnsembleModel,
    trial: Arc<Trial>,
    catalog: &StreamCatalog,
    spec: &SegmentSpec,
) -> Result<TrialVote> {
    let segments = segment_trial(&trial, spec);
    let matrix = build_feature_matrix(&segments, catalog)?.select_columns(&model.used_features())?;
    let preds = model.predict_segments(&matrix)?;
    let mut votes = vote_trials(matrix.meta(), &preds, model.classes());
    Ok(votes.remove(0))
}

pub fn predictions_csv(votes: &[TrialVote]) -> String {
    let mut out = String::from("trial_id,predicted_label,segment_labels\n");
    for v in votes {
        let segs: Vec<String> = v.segment_labels.iter().map(|l| l.to_string()).collect();
        out.push_str(&format!("{},{},{}\n", v.trial_id, v.label, segs.join(";")));
    }
    out
}

pub fn require_labels(manifest: &Manifest) -> Result<()> {
    match manifest.rows.iter().find(|r| r.label.is_none()) {
        Some(r) => Err(Error::Unlabeled(r.trial_id())),
        None => Ok(()),
    }
}

/// Full training run on a labeled manifest.
pub fn train(manifest: &Manifest, config: &PipelineConfig) -> Result<ModelFile> {
    require_labels(manifest)?;
    let catalog = config.catalog()?;
    let matrix = manifest_matrix(manifest, config, &catalog)?;
    let fitted = fit(&matrix, config, config.seed)?;
    let chosen: Vec<String> = fitted
        .ensemble
        .members
        .iter()
        .map(|m| format!("{}#{}", m.kind, m.subset_index))
        .collect();
    log::info!("ensemble members: {}", chosen.join(", "));
    Ok(ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        config: config.clone(),
        catalog,
        segment: config.segment_spec()?,
        classes: fitted.ensemble.classes.clone(),
        selected_features: fitted.selection.selected,
        subsets: fitted.subsets,
        leaderboard: fitted.leaderboard,
        ensemble: fitted.ensemble,
    })
}

/// Cross-validates the whole fitting procedure on a precomputed matrix.
/// Selection, subsets and the ensemble are refit inside every fold.
pub fn evaluate_matrix(matrix: &FeatureMatrix, config: &PipelineConfig, scheme: Scheme) -> Result<EvalReport> {
    let trials = trial_infos(matrix);
    let plan = fold_plan(&trials, scheme, config.folds, seed::derive(config.seed, &[seed::TAG_FOLD, 1]))?;
    evaluate_plan(matrix, &plan, |train, fold| {
        let fitted = fit(train, config, seed::derive(config.seed, &[seed::TAG_FOLD, 2, fold as u64]))?;
        Ok(FittedFold {
            model: Box::new(fitted.ensemble),
            baseline: fitted.baseline.map(|b| Box::new(b) as Box<dyn SegmentClassifier>),
            leaderboard: Some(fitted.leaderboard),
            selected_features: fitted.selection.selected,
        })
    })
}

pub fn evaluate(manifest: &Manifest, config: &PipelineConfig, scheme: Scheme) -> Result<EvalReport> {
    require_labels(manifest)?;
    let catalog = config.catalog()?;
    let matrix = manifest_matrix(manifest, config, &catalog)?;
    evaluate_matrix(&matrix, config, scheme)
}
