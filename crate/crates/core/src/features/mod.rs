//! Segment feature matrix, filter scores and feature subsets.

pub mod extract;
pub mod matrix;
pub mod selection;

pub use extract::{
    build_feature_matrix, extract_spectral_features, extract_time_features, feature_names,
    segment_features, SpectralExtractor, FEATURES_PER_STREAM, SPECTRAL_FEATURES, TIME_FEATURES,
};
pub use matrix::{FeatureMatrix, RowMeta};
pub use selection::{
    chi_square_scores, mdi_importances, partition_feature_subsets, select_features, FeatureSubset,
    SelectionReport,
};
