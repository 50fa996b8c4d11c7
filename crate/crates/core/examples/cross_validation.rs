//! Trial-level 10-fold and leave-one-subject-out evaluation of the whole
//! fitting procedure, with the naive Bayes baseline alongside.
//!
//! cargo run --release --example cross_validation -- [REPORT_DIR]

use std::time::Instant;

use mocap_har::evaluation::Scheme;
use mocap_har::{pipeline, synthgen, PipelineConfig, StreamCatalog, SynthSpec};

fn main() -> mocap_har::Result<()> {
    let report_dir = std::env::args().nth(1);
    let dir = tempfile::tempdir().map_err(|e| mocap_har::Error::io(std::env::temp_dir(), e))?;
    let manifest = synthgen::generate_dataset(&SynthSpec::default(), dir.path())?;
    let config = PipelineConfig::default();
    let matrix = pipeline::manifest_matrix(&manifest, &config, &StreamCatalog::default())?;
    for scheme in [Scheme::Kfold, Scheme::Loso] {
        let start = Instant::now();
        let report = pipeline::evaluate_matrix(&matrix, &config, scheme)?;
        println!(
            "{scheme}: ensemble {:.3}, naive Bayes {:.3}, segment-level {:.3} ({} folds, {:.0} s)",
            report.pooled_accuracy,
            report.baseline_pooled_accuracy.unwrap_or(f64::NAN),
            report.segment_accuracy,
            report.folds.len(),
            start.elapsed().as_secs_f64()
        );
        print!("{}", report.confusion.to_csv());
        if let Some(d) = &report_dir {
            report.write(format!("{d}/{scheme}"))?;
        }
    }
    Ok(())
}
