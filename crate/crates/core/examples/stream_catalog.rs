//! Expands one synthetic segment into the default stream catalog and shows a
//! few streams and their features.
//!
//! cargo run --release --example stream_catalog

use std::sync::Arc;

use mocap_har::features::{extract_spectral_features, extract_time_features, FEATURES_PER_STREAM};
use mocap_har::streams::synthesize_streams;
use mocap_har::windowing::segment_trial;
use mocap_har::{synthgen, SegmentSpec, StreamCatalog, SynthSpec};

fn main() -> mocap_har::Result<()> {
    let catalog = StreamCatalog::default();
    catalog.validate()?;
    println!(
        "{} markers, {} streams, {} features per segment",
        catalog.schema.len(),
        catalog.stream_count(),
        catalog.stream_count() * FEATURES_PER_STREAM
    );

    let spec = SynthSpec::default();
    let trial = Arc::new(synthgen::generate_trial(&spec, 0, 3, 0));
    let segments = segment_trial(&trial, &SegmentSpec::default());
    println!("trial {} ({} frames) -> {} segments", trial.trial_id, trial.len(), segments.len());

    let streams = synthesize_streams(&segments[0], &catalog, trial.sample_rate_hz)?;
    for name in ["LWrist.z", "LWrist.z.jerk", "dist.LWrist-RWrist", "jang.LShoulder-LElbow-LWrist", "pang.VSacral-FrontHead.XY"] {
        let s = streams.iter().find(|s| s.name == name).expect("catalog stream");
        let t = extract_time_features(&s.samples)?;
        let f = extract_spectral_features(&s.samples, trial.sample_rate_hz)?;
        println!(
            "{name:<32} mean {:>10.3}  std {:>9.3}  spectral median {:>6.3} Hz  energy {:>10.3}",
            t[0], t[4], f[0], f[3]
        );
    }
    Ok(())
}
