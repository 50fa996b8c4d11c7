//! Fixed-length overlapped windows over a trial.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Label, Trial, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub window_s: f64,
    pub overlap_fraction: f64,
}

impl Default for SegmentSpec {
    fn default() -> Self {
        SegmentSpec {
            window_s: 30.0,
            overlap_fraction: 0.5,
        }
    }
}

impl SegmentSpec {
    pub fn new(window_s: f64, overlap_fraction: f64) -> Result<Self> {
        let spec = SegmentSpec { window_s, overlap_fraction };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_s > 0.0 && self.window_s.is_finite()) {
            return Err(Error::BadConfig(format!("window_s must be > 0, got {}", self.window_s)));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(Error::BadConfig(format!(
                "overlap_fraction must be in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        Ok(())
    }

    pub fn window_frames(&self, fs: f64) -> usize {
        ((self.window_s * fs).round() as usize).max(1)
    }

    pub fn stride_frames(&self, fs: f64) -> usize {
        let w = self.window_frames(fs) as f64;
        ((w * (1.0 - self.overlap_fraction)).round() as usize).max(1)
    }
}

/// A window `[start, start + len)` of a parent trial.
#[derive(Debug, Clone)]
pub struct Segment {
    pub trial: Arc<Trial>,
    pub start_frame: usize,
    pub length_frames: usize,
}

impl Segment {
    pub fn frames(&self) -> &[Vec<Vec3>] {
        &self.trial.frames[self.start_frame..self.start_frame + self.length_frames]
    }

    pub fn trial_id(&self) -> &str {
        &self.trial.trial_id
    }

    pub fn subject_id(&self) -> &str {
        &self.trial.subject_id
    }

    pub fn label(&self) -> Option<Label> {
        self.trial.label
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.trial.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.length_frames
    }

    pub fn is_empty(&self) -> bool {
        self.length_frames == 0
    }
}

/// Start frames for a trial of `n` frames.
pub fn segment_starts(n: usize, window: usize, stride: usize) -> Vec<usize> {
    if n < window {
        return vec![0];
    }
    (0..=(n - window) / stride).map(|i| i * stride).collect()
}

pub fn segment_trial(trial: &Arc<Trial>, spec: &SegmentSpec) -> Vec<Segment> {
    let fs = trial.sample_rate_hz;
    let n = trial.len();
    let window = spec.window_frames(fs);
    let stride = spec.stride_frames(fs);
    segment_starts(n, window, stride)
        .into_iter()
        .map(|start| Segment {
            trial: Arc::clone(trial),
            start_frame: start,
            length_frames: window.min(n),
        })
        .collect()
}
