//! Activity recognition from optical motion-capture trials.
//!
//! Trials are cut into overlapping segments, each segment is expanded into
//! scalar streams (coordinates and their derivatives, inter-marker distances,
//! joint and planar angles), every stream is summarized by time and spectral
//! statistics, a filter plus importance ranking picks the strongest features,
//! and a five-member vote over Random Forest and Extra-Trees models trained on
//! overlapping feature subsets labels each segment. Trial labels are the
//! plurality over segments.
//!
//! ```no_run
//! use mocap_har::{ingest, pipeline, PipelineConfig};
//!
//! let manifest = ingest::load_manifest("data/manifest.csv")?;
//! let model = pipeline::train(&manifest, &PipelineConfig::default())?;
//! let votes = model.predict_manifest(&manifest)?;
//! print!("{}", pipeline::predictions_csv(&votes));
//! # Ok::<(), mocap_har::Error>(())
//! ```

pub mod config;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod ingest;
pub mod models;
pub mod pipeline;
pub mod seed;
pub mod streams;
pub mod synthgen;
pub mod windowing;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use evaluation::{ConfusionMatrix, EvalReport, FoldPlan, Scheme};
pub use features::FeatureMatrix;
pub use ingest::{Label, Manifest, Trial};
pub use models::{EnsembleModel, TrialVote};
pub use pipeline::ModelFile;
pub use streams::StreamCatalog;
pub use synthgen::SynthSpec;
pub use windowing::{Segment, SegmentSpec};
