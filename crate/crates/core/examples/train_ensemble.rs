//! Trains the five-member ensemble on a synthetic dataset and prints the
//! candidate leaderboard.
//!
//! cargo run --release --example train_ensemble

use std::time::Instant;

use mocap_har::{pipeline, synthgen, PipelineConfig, SynthSpec};

fn main() -> mocap_har::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| mocap_har::Error::io(std::env::temp_dir(), e))?;
    let manifest = synthgen::generate_dataset(&SynthSpec::default(), dir.path())?;
    let start = Instant::now();
    let model = pipeline::train(&manifest, &PipelineConfig::default())?;
    println!("trained in {:.1} s", start.elapsed().as_secs_f64());
    println!("rank kind subset cv_accuracy member");
    for e in &model.leaderboard.entries {
        println!(
            "{:>4} {:>4} {:>6} {:>11.3} {}",
            e.rank,
            e.kind,
            e.subset_index,
            e.cv_accuracy,
            if e.selected { "*" } else { "" }
        );
    }
    let path = dir.path().join("ensemble.model.json");
    model.save(&path)?;
    let bytes = std::fs::metadata(&path).map_err(|e| mocap_har::Error::io(&path, e))?.len();
    println!("model file: {} KiB", bytes / 1024);
    Ok(())
}
