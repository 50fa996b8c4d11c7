//! Trains on three synthetic subjects, saves and reloads the model, and
//! labels the trials of a fourth subject with its labels hidden.
//!
//! cargo run --release --example predict_trials

use mocap_har::ingest::Manifest;
use mocap_har::{pipeline, synthgen, ModelFile, PipelineConfig, SynthSpec};

fn main() -> mocap_har::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| mocap_har::Error::io(std::env::temp_dir(), e))?;
    let spec = SynthSpec { n_subjects: 4, ..SynthSpec::default() };
    let all = synthgen::generate_dataset(&spec, dir.path())?;
    let held_out = synthgen::subject_id(3);
    let (test_rows, train_rows): (Vec<_>, Vec<_>) = all.rows.into_iter().partition(|r| r.subject_id == held_out);
    let train = Manifest::new(train_rows)?;

    let model_path = dir.path().join("har.model.json");
    pipeline::train(&train, &PipelineConfig::default())?.save(&model_path)?;
    let model = ModelFile::load(&model_path)?;

    // Hide the labels, as for a held-out test set.
    let truth: Vec<_> = test_rows.iter().map(|r| r.label).collect();
    let unlabeled = Manifest::new(test_rows.into_iter().map(|mut r| {
        r.label = None;
        r
    }).collect())?;
    let votes = model.predict_manifest(&unlabeled)?;
    print!("{}", pipeline::predictions_csv(&votes[..5]));
    let correct = votes.iter().zip(&truth).filter(|(v, t)| Some(v.label) == **t).count();
    println!("... {correct}/{} correct on subject {held_out}", votes.len());
    Ok(())
}
