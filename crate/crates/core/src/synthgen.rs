//! Deterministic synthetic MoCap datasets laid out like the challenge data:
//! subjects x activities x repetitions, one CSV per trial plus a manifest.
//!
//! Each activity is a base pose plus a per-marker mixture of sinusoids. A
//! subject plays every activity at its own tempo (a time-scale factor drawn
//! from `1 ± spread`), which stretches both the trial duration and the
//! motion frequencies. Repetitions of the same activity get small phase and
//! amplitude jitter, and every sample receives Gaussian noise.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    write_manifest, write_trial_csv, Label, Manifest, ManifestRow, MarkerSchema, Trial, Vec3,
    MAX_LABEL,
};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_subjects: usize,
    pub n_classes: usize,
    pub trials_per_class: usize,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub subject_time_scale_spread: f64,
    pub noise_std_mm: f64,
    /// Fraction of samples per coordinate blanked out to exercise gap repair.
    pub gap_fraction: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_subjects: 3,
            n_classes: 10,
            trials_per_class: 5,
            duration_s: 60.0,
            sample_rate_hz: 100.0,
            subject_time_scale_spread: 0.15,
            noise_std_mm: 2.0,
            gap_fraction: 0.0,
            seed: 42,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadConfig(m.to_string()));
        if self.n_subjects < 2 {
            return bad("n_subjects must be >= 2");
        }
        if self.n_classes == 0 || self.n_classes > MAX_LABEL as usize {
            return bad("n_classes must be in 1..=10");
        }
        if self.trials_per_class == 0 {
            return bad("trials_per_class must be >= 1");
        }
        if !(self.duration_s > 0.0 && self.sample_rate_hz > 0.0) {
            return bad("duration and sample rate must be positive");
        }
        if !(self.subject_time_scale_spread >= 0.0 && self.subject_time_scale_spread < 1.0) {
            return bad("spread must be in [0, 1)");
        }
        if !(self.noise_std_mm >= 0.0) {
            return bad("noise must be non-negative");
        }
        if !(0.0..0.5).contains(&self.gap_fraction) {
            return bad("gap_fraction must be in [0, 0.5)");
        }
        Ok(())
    }

    pub fn n_trials(&self) -> usize {
        self.n_subjects * self.n_classes * self.trials_per_class
    }

    /// Tempo factor for a subject; > 1 means slower motion and a longer trial.
    pub fn subject_time_scale(&self, subject_index: usize) -> f64 {
        let mut rng = seed::rng(self.seed, &[seed::TAG_SUBJECT, subject_index as u64]);
        let u: f64 = rng.random();
        1.0 + self.subject_time_scale_spread * (2.0 * u - 1.0)
    }
}

const COMPONENTS: usize = 2;

/// Log-scale bound on how far a class strays from the shared prototype in
/// frequency and amplitude.
const CLASS_CONTRAST: f64 = 0.15;

/// Horizontal half-range, mm, of where in the capture volume a class is
/// performed and of how far one repetition's standing spot strays from it.
const CLASS_PLACEMENT_MM: f64 = 60.0;
const STANCE_JITTER_MM: f64 = 60.0;

/// Chance that a repetition is performed with the other hand.
const MIRROR_PROBABILITY: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
struct Sinusoid {
    freq_hz: f64,
    amplitude: f64,
    phase: f64,
}

/// Class-level motion model: `poses[m]` and `waves[m][axis]`.
struct ClassModel {
    poses: Vec<Vec3>,
    waves: Vec<[[Sinusoid; COMPONENTS]; 3]>,
}

/// Neutral standing pose in millimetres, z up.
fn neutral_pose(marker: &str, index: usize) -> Vec3 {
    match marker {
        "FrontHead" => Vec3::new(0.0, 80.0, 1700.0),
        "BackHead" => Vec3::new(0.0, -80.0, 1680.0),
        "VSacral" => Vec3::new(0.0, -120.0, 1000.0),
        "Sternum" => Vec3::new(0.0, 90.0, 1300.0),
        "Clavicle" => Vec3::new(0.0, 60.0, 1430.0),
        "LShoulder" => Vec3::new(-190.0, 0.0, 1450.0),
        "RShoulder" => Vec3::new(190.0, 0.0, 1450.0),
        "LElbow" => Vec3::new(-240.0, 60.0, 1170.0),
        "RElbow" => Vec3::new(240.0, 60.0, 1170.0),
        "LWrist" => Vec3::new(-200.0, 300.0, 1050.0),
        "RWrist" => Vec3::new(200.0, 300.0, 1050.0),
        "LHand" => Vec3::new(-190.0, 380.0, 1030.0),
        "RHand" => Vec3::new(190.0, 380.0, 1030.0),
        _ => Vec3::new(50.0 * index as f64, 0.0, 1200.0),
    }
}

/// Hands and arms move more than the trunk and head.
fn mobility(marker: &str) -> f64 {
    match marker {
        "LWrist" | "RWrist" | "LHand" | "RHand" => 1.0,
        "LElbow" | "RElbow" => 0.6,
        "LShoulder" | "RShoulder" | "Clavicle" | "Sternum" => 0.25,
        "FrontHead" | "BackHead" => 0.3,
        _ => 0.15,
    }
}

fn class_model(spec: &SynthSpec, schema: &MarkerSchema, class_index: usize) -> ClassModel {
    // Every class perturbs one shared prototype, so activities overlap in
    // most of their motion and differ by a bounded contrast.
    let mut proto = seed::rng(spec.seed, &[seed::TAG_CLASS, u64::MAX]);
    let mut rng = seed::rng(spec.seed, &[seed::TAG_CLASS, class_index as u64]);
    let r = CLASS_PLACEMENT_MM;
    let placement = Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), 0.0);
    let mut poses = Vec::with_capacity(schema.len());
    let mut waves = Vec::with_capacity(schema.len());
    for (m, name) in schema.names().iter().enumerate() {
        let k = mobility(name);
        poses.push(neutral_pose(name, m).add(placement));
        let mut per_axis = [[Sinusoid { freq_hz: 0.0, amplitude: 0.0, phase: 0.0 }; COMPONENTS]; 3];
        for axis in per_axis.iter_mut() {
            for c in axis.iter_mut() {
                let base_freq: f64 = proto.random_range(0.2..1.2);
                let base_amp: f64 = proto.random_range(10.0..60.0);
                *c = Sinusoid {
                    freq_hz: base_freq * rng.random_range(-CLASS_CONTRAST..CLASS_CONTRAST).exp(),
                    amplitude: base_amp * k * rng.random_range(-CLASS_CONTRAST..CLASS_CONTRAST).exp(),
                    phase: rng.random_range(0.0..TAU),
                };
            }
        }
        waves.push(per_axis);
    }
    ClassModel { poses, waves }
}

/// Index of the left/right counterpart of marker `m`, or `m` itself.
fn mirror_partner(names: &[String], m: usize) -> usize {
    let name = &names[m];
    let other = if let Some(rest) = name.strip_prefix('L') {
        format!("R{rest}")
    } else if let Some(rest) = name.strip_prefix('R') {
        format!("L{rest}")
    } else {
        return m;
    };
    names.iter().position(|n| *n == other).unwrap_or(m)
}

pub fn trial_id(subject_index: usize, class_index: usize, trial_index: usize) -> String {
    format!("S{:02}_A{:02}_T{:02}", subject_index + 1, class_index + 1, trial_index + 1)
}

pub fn subject_id(subject_index: usize) -> String {
    format!("S{:02}", subject_index + 1)
}

pub fn generate_trial(
    spec: &SynthSpec,
    subject_index: usize,
    class_index: usize,
    trial_index: usize,
) -> Trial {
    assert!(subject_index < spec.n_subjects, "subject index out of range");
    assert!(class_index < spec.n_classes, "class index out of range");
    assert!(trial_index < spec.trials_per_class, "trial index out of range");
    let schema = MarkerSchema::default();
    let model = class_model(spec, &schema, class_index);
    let scale = spec.subject_time_scale(subject_index);
    let fs = spec.sample_rate_hz;
    let n_frames = ((spec.duration_s * scale * fs).round() as usize).max(2);

    // Repetition jitter depends on (class, repetition) only, so with zero
    // spread every subject performs an identical waveform up to noise.
    let mut jitter_rng =
        seed::rng(spec.seed, &[seed::TAG_TRIAL, class_index as u64, trial_index as u64]);
    let mut jitter = Vec::with_capacity(schema.len());
    for _ in 0..schema.len() {
        let amp = jitter_rng.random_range(0.75..1.25);
        let mut phases = [[0.0; COMPONENTS]; 3];
        for axis in phases.iter_mut() {
            for p in axis.iter_mut() {
                *p = jitter_rng.random_range(0.0..TAU);
            }
        }
        jitter.push((amp, phases));
    }
    // A mirrored repetition swaps left and right and reflects x, so each
    // marker replays its counterpart's motion.
    let mirrored = jitter_rng.random_bool(MIRROR_PROBABILITY);
    let source: Vec<usize> = (0..schema.len())
        .map(|m| if mirrored { mirror_partner(schema.names(), m) } else { m })
        .collect();
    let r = STANCE_JITTER_MM;
    let stance = Vec3::new(jitter_rng.random_range(-r..r), jitter_rng.random_range(-r..r), 0.0);

    let mut noise_rng = seed::rng(
        spec.seed,
        &[seed::TAG_NOISE, subject_index as u64, class_index as u64, trial_index as u64],
    );
    let noise = Normal::new(0.0, spec.noise_std_mm.max(0.0)).expect("valid normal");

    let mut frames = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let time = t as f64 / fs / scale;
        let mut frame = Vec::with_capacity(schema.len());
        for m in 0..schema.len() {
            let src = source[m];
            let (amp, phases) = &jitter[m];
            let mut p = model.poses[src];
            for axis in 0..3 {
                let mut v = 0.0;
                for (c, s) in model.waves[src][axis].iter().enumerate() {
                    v += s.amplitude * (TAU * s.freq_hz * time + s.phase + phases[axis][c]).sin();
                }
                let mut sample = p.axis(axis) + amp * v;
                if mirrored && axis == 0 {
                    sample = -sample;
                }
                sample += stance.axis(axis);
                if spec.noise_std_mm > 0.0 {
                    sample += noise.sample(&mut noise_rng);
                }
                *p.axis_mut(axis) = sample;
            }
            frame.push(p);
        }
        frames.push(frame);
    }

    if spec.gap_fraction > 0.0 {
        inject_gaps(spec, subject_index, class_index, trial_index, &mut frames);
    }

    Trial {
        trial_id: trial_id(subject_index, class_index, trial_index),
        subject_id: subject_id(subject_index),
        label: Some((class_index + 1) as Label),
        sample_rate_hz: fs,
        schema,
        frames,
    }
}

/// Blanks one contiguous run per coordinate covering `gap_fraction` of it.
fn inject_gaps(
    spec: &SynthSpec,
    subject_index: usize,
    class_index: usize,
    trial_index: usize,
    frames: &mut [Vec<Vec3>],
) {
    let mut rng = seed::rng(
        spec.seed,
        &[seed::TAG_GAPS, subject_index as u64, class_index as u64, trial_index as u64],
    );
    let n = frames.len();
    let run = ((n as f64 * spec.gap_fraction).floor() as usize).min(n.saturating_sub(1));
    if run == 0 {
        return;
    }
    let n_markers = frames[0].len();
    for m in 0..n_markers {
        for axis in 0..3 {
            let start = rng.random_range(0..=n - run);
            for f in &mut frames[start..start + run] {
                *f[m].axis_mut(axis) = f64::NAN;
            }
        }
    }
}

/// Writes every trial plus `manifest.csv` into `out_dir` and returns the
/// manifest (with absolute trial paths).
pub fn generate_dataset(spec: &SynthSpec, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let units: Vec<(usize, usize, usize)> = (0..spec.n_subjects)
        .flat_map(|s| {
            (0..spec.n_classes)
                .flat_map(move |c| (0..spec.trials_per_class).map(move |t| (s, c, t)))
        })
        .collect();
    let rows = units
        .par_iter()
        .map(|&(s, c, t)| {
            let trial = generate_trial(spec, s, c, t);
            let path: PathBuf = out_dir.join(format!("{}.csv", trial.trial_id));
            write_trial_csv(&trial, &path)?;
            Ok(ManifestRow {
                path,
                subject_id: trial.subject_id,
                label: trial.label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest::new(rows)?;
    write_manifest(&manifest, out_dir.join("manifest.csv"))?;
    Ok(manifest)
}
