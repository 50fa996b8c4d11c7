//! Flat `key = value` pipeline configuration with `#` comments.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::Scheme;
use crate::features::selection::DEFAULT_TARGET;
use crate::ingest::{DEFAULT_SAMPLE_RATE_HZ, DEFAULT_MAX_MISSING_FRACTION};
use crate::models::{Composition, EnsembleConfig, ForestConfig, MaxFeatures};
use crate::streams::StreamCatalog;
use crate::windowing::SegmentSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sample_rate_hz: f64,
    pub max_missing_fraction: f64,
    pub window_s: f64,
    pub overlap_fraction: f64,
    /// Catalog file; the built-in 218-stream catalog when absent.
    pub stream_catalog: Option<PathBuf>,
    pub feature_target: usize,
    pub subset_count: usize,
    pub subset_size: usize,
    /// Trees in the forest that scores MDI importances.
    pub probe_trees: usize,
    pub forest_trees: usize,
    pub cv_trees: usize,
    pub candidate_cv_folds: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub composition: Composition,
    pub seed: u64,
    pub scheme: Scheme,
    pub folds: usize,
    /// Also score a Gaussian naive Bayes on the selected features.
    pub baseline: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            max_missing_fraction: DEFAULT_MAX_MISSING_FRACTION,
            window_s: 30.0,
            overlap_fraction: 0.5,
            stream_catalog: None,
            feature_target: DEFAULT_TARGET,
            subset_count: 13,
            subset_size: 200,
            probe_trees: 200,
            forest_trees: 300,
            cv_trees: 100,
            candidate_cv_folds: 10,
            max_depth: None,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            composition: Composition::Top,
            seed: 42,
            scheme: Scheme::Kfold,
            folds: 10,
            baseline: true,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::BadConfig(format!("{key}: cannot parse {value:?}")))
}

fn parse_optional(key: &str, value: &str) -> Result<Option<usize>> {
    match value {
        "none" | "" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

fn max_features_text(m: MaxFeatures) -> String {
    match m {
        MaxFeatures::Sqrt => "sqrt".into(),
        MaxFeatures::All => "all".into(),
        MaxFeatures::Count(k) => k.to_string(),
    }
}

fn composition_text(c: Composition) -> &'static str {
    match c {
        Composition::Top => "top",
        Composition::FourRfOneEt => "4rf1et",
    }
}

impl PipelineConfig {
    /// Parses config text. Relative catalog paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut c = PipelineConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::BadConfig(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::BadConfig(format!("duplicate key {key}")));
            }
            match key {
                "sample_rate_hz" => c.sample_rate_hz = parse(key, value)?,
                "max_missing_fraction" => c.max_missing_fraction = parse(key, value)?,
                "window_s" => c.window_s = parse(key, value)?,
                "overlap_fraction" => c.overlap_fraction = parse(key, value)?,
                "stream_catalog" => {
                    c.stream_catalog = match value {
                        "" | "default" => None,
                        v => {
                            let p = PathBuf::from(v);
                            Some(match base {
                                Some(b) if p.is_relative() => b.join(p),
                                _ => p,
                            })
                        }
                    }
                }
                "feature_target" => c.feature_target = parse(key, value)?,
                "subset_count" => c.subset_count = parse(key, value)?,
                "subset_size" => c.subset_size = parse(key, value)?,
                "probe_trees" => c.probe_trees = parse(key, value)?,
                "forest_trees" => c.forest_trees = parse(key, value)?,
                "cv_trees" => c.cv_trees = parse(key, value)?,
                "candidate_cv_folds" => c.candidate_cv_folds = parse(key, value)?,
                "max_depth" => c.max_depth = parse_optional(key, value)?,
                "min_samples_leaf" => c.min_samples_leaf = parse(key, value)?,
                "max_features" => {
                    c.max_features = match value {
                        "sqrt" => MaxFeatures::Sqrt,
                        "all" => MaxFeatures::All,
                        v => MaxFeatures::Count(parse(key, v)?),
                    }
                }
                "composition" => {
                    c.composition = match value {
                        "top" => Composition::Top,
                        "4rf1et" => Composition::FourRfOneEt,
                        v => return Err(Error::BadConfig(format!("composition: unknown value {v:?}"))),
                    }
                }
                "seed" => c.seed = parse(key, value)?,
                "scheme" => c.scheme = value.parse()?,
                "folds" => c.folds = parse(key, value)?,
                "baseline" => c.baseline = parse(key, value)?,
                other => return Err(Error::BadConfig(format!("unknown key {other:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadConfig(m.to_string()));
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return bad("sample_rate_hz must be positive");
        }
        if !(0.0..=1.0).contains(&self.max_missing_fraction) {
            return bad("max_missing_fraction must be in [0, 1]");
        }
        self.segment_spec()?;
        if self.overlap_fraction > 0.9 {
            return bad("overlap_fraction must be in [0, 0.9]");
        }
        if self.feature_target == 0 {
            return bad("feature_target must be >= 1");
        }
        if self.subset_count == 0 || self.subset_size == 0 || self.subset_size > self.feature_target {
            return bad("need subset_count >= 1 and 1 <= subset_size <= feature_target");
        }
        if self.probe_trees == 0 || self.forest_trees == 0 || self.cv_trees == 0 {
            return bad("tree counts must be >= 1");
        }
        if self.candidate_cv_folds < 2 || self.folds < 2 {
            return bad("fold counts must be >= 2");
        }
        self.forest(crate::models::ForestKind::RandomForest, 1).tree_config().validate()
    }

    pub fn segment_spec(&self) -> Result<SegmentSpec> {
        SegmentSpec::new(self.window_s, self.overlap_fraction)
    }

    pub fn catalog(&self) -> Result<StreamCatalog> {
        match &self.stream_catalog {
            Some(p) => StreamCatalog::load(p),
            None => Ok(StreamCatalog::default()),
        }
    }

    pub fn forest(&self, kind: crate::models::ForestKind, n_trees: usize) -> ForestConfig {
        ForestConfig {
            kind,
            n_trees,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: self.max_features,
        }
    }

    pub fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig {
            n_trees: self.forest_trees,
            cv_trees: self.cv_trees,
            cv_folds: self.candidate_cv_folds,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: self.max_features,
            kinds: [true, true],
            composition: self.composition,
        }
    }

    /// Renders the config in the same format `parse` reads.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("sample_rate_hz", self.sample_rate_hz.to_string());
        kv("max_missing_fraction", self.max_missing_fraction.to_string());
        kv("window_s", self.window_s.to_string());
        kv("overlap_fraction", self.overlap_fraction.to_string());
        kv(
            "stream_catalog",
            self.stream_catalog.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "default".into()),
        );
        kv("feature_target", self.feature_target.to_string());
        kv("subset_count", self.subset_count.to_string());
        kv("subset_size", self.subset_size.to_string());
        kv("probe_trees", self.probe_trees.to_string());
        kv("forest_trees", self.forest_trees.to_string());
        kv("cv_trees", self.cv_trees.to_string());
        kv("candidate_cv_folds", self.candidate_cv_folds.to_string());
        kv("max_depth", self.max_depth.map(|d| d.to_string()).unwrap_or_else(|| "none".into()));
        kv("min_samples_leaf", self.min_samples_leaf.to_string());
        kv("max_features", max_features_text(self.max_features));
        kv("composition", composition_text(self.composition).into());
        kv("seed", self.seed.to_string());
        kv("scheme", self.scheme.to_string());
        kv("folds", self.folds.to_string());
        kv("baseline", self.baseline.to_string());
        s
    }
}
