//! Builds the segment feature matrix for a synthetic dataset, scores every
//! feature, keeps the strongest and cuts the overlapping subsets.
//!
//! cargo run --release --example feature_selection

use mocap_har::features::{chi_square_scores, mdi_importances, partition_feature_subsets, select_features};
use mocap_har::models::ForestConfig;
use mocap_har::{pipeline, synthgen, PipelineConfig, StreamCatalog, SynthSpec};

fn main() -> mocap_har::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| mocap_har::Error::io(std::env::temp_dir(), e))?;
    let manifest = synthgen::generate_dataset(&SynthSpec::default(), dir.path())?;
    let config = PipelineConfig::default();
    let matrix = pipeline::manifest_matrix(&manifest, &config, &StreamCatalog::default())?;
    println!("{} segments x {} features", matrix.n_rows(), matrix.n_cols());

    let chi2 = chi_square_scores(&matrix)?;
    let mdi = mdi_importances(&matrix, &ForestConfig::random_forest(config.probe_trees), config.seed)?;
    println!("MDI importances sum to {:.6}", mdi.iter().sum::<f64>());
    let selection = select_features(matrix.names(), &chi2, &mdi, config.feature_target)?;
    println!("selected {} features; strongest:", selection.selected.len());
    for name in selection.selected.iter().take(8) {
        let j = matrix.names().iter().position(|n| n == name).expect("known");
        println!("  {name:<40} mdi {:.4}  chi2 {:.3}", mdi[j], chi2[j]);
    }
    let subsets = partition_feature_subsets(&selection.selected, config.subset_count, config.subset_size)?;
    for s in &subsets {
        println!("subset {:>2}: {} features, first {}", s.index, s.features.len(), s.features[0]);
    }
    Ok(())
}
