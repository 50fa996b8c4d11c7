//! Writes a synthetic labeled dataset and prints what was generated.
//!
//! cargo run --release --example synth_dataset -- [OUT_DIR]

use mocap_har::{ingest, synthgen, SynthSpec};

fn main() -> mocap_har::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "synthetic-data".into());
    let spec = SynthSpec::default();
    let manifest = synthgen::generate_dataset(&spec, &out)?;
    println!("{} trials in {out}", manifest.len());
    for s in 0..spec.n_subjects {
        println!("  {} tempo factor {:.3}", synthgen::subject_id(s), spec.subject_time_scale(s));
    }
    let reread = ingest::load_manifest(format!("{out}/manifest.csv"))?;
    let first = &reread.rows[0];
    let trial = ingest::load_trial(first, &Default::default(), spec.sample_rate_hz, 0.2)?;
    println!(
        "first trial {} (subject {}, label {:?}): {} frames, {:.1} s, {} markers",
        trial.trial_id,
        trial.subject_id,
        trial.label,
        trial.len(),
        trial.duration_s(),
        trial.schema.len()
    );
    Ok(())
}
