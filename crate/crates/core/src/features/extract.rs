//! Per-stream statistical and spectral features.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::matrix::{FeatureMatrix, RowMeta};
use crate::error::{Error, Result};
use crate::streams::{synthesize_streams, StreamCatalog};
use crate::windowing::Segment;

pub const TIME_FEATURES: [&str; 7] = ["mean", "median", "min", "max", "std", "skew", "kurt"];
pub const SPECTRAL_FEATURES: [&str; 4] = ["spec_median", "spec_skew", "spec_kurt", "spec_energy"];
pub const FEATURES_PER_STREAM: usize = TIME_FEATURES.len() + SPECTRAL_FEATURES.len();

/// Variance below this (relative to the signal's magnitude) counts as zero.
fn is_flat(variance: f64, scale: f64) -> bool {
    let tol = 1e-12 * scale.max(1.0);
    variance <= tol * tol
}

fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// mean, median, min, max, population std, skewness, excess kurtosis.
pub fn extract_time_features(samples: &[f64]) -> Result<[f64; 7]> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooShort { len: n, min: 2 });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in samples {
        min = min.min(v);
        max = max.max(v);
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let std = m2.sqrt();
    let (skew, kurt) = if is_flat(m2, min.abs().max(max.abs())) {
        (0.0, 0.0)
    } else {
        (m3 / (m2 * std), m4 / (m2 * m2) - 3.0)
    };
    Ok([mean, median_of(samples), min, max, std, skew, kurt])
}

/// Spectral features computed on the one-sided power spectrum of the
/// mean-removed signal. Reuses one FFT plan across equally long streams.
pub struct SpectralExtractor {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl SpectralExtractor {
    pub fn new(len: usize) -> Result<Self> {
        if len < 4 {
            return Err(Error::TooShort { len, min: 4 });
        }
        let fft = FftPlanner::new().plan_fft_forward(len);
        Ok(SpectralExtractor { len, fft })
    }

    /// Periodogram `P_k = c_k |X_k|^2 / n` for `k = 0..=n/2`, with `c_k = 2`
    /// on bins that stand for a conjugate pair. `Σ P_k` equals `Σ (x - mean)^2`.
    pub fn power_spectrum(&self, samples: &[f64]) -> Vec<f64> {
        let n = self.len;
        let mean = samples.iter().sum::<f64>() / n as f64;
        let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();
        self.fft.process(&mut buf);
        (0..=n / 2)
            .map(|k| {
                let paired = k != 0 && !(n % 2 == 0 && k == n / 2);
                let c = if paired { 2.0 } else { 1.0 };
                c * buf[k].norm_sqr() / n as f64
            })
            .collect()
    }

    /// spectral median, spectral skew, spectral (excess) kurtosis, energy.
    pub fn extract(&self, samples: &[f64], fs: f64) -> Result<[f64; 4]> {
        if samples.len() != self.len {
            return Err(Error::LengthMismatch(samples.len(), self.len));
        }
        let n = self.len as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let scale = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if is_flat(variance, scale) {
            return Ok([0.0; 4]);
        }
        let power = self.power_spectrum(samples);
        let total: f64 = power.iter().sum();
        if total <= 0.0 {
            return Ok([0.0; 4]);
        }
        let freq = |k: usize| k as f64 * fs / n;
        let energy = total / n;

        let half = 0.5 * total;
        let mut cum = 0.0;
        let mut median = freq(power.len() - 1);
        for (k, p) in power.iter().enumerate() {
            cum += p;
            if cum >= half {
                median = freq(k);
                break;
            }
        }

        let centroid: f64 = power.iter().enumerate().map(|(k, p)| freq(k) * p).sum::<f64>() / total;
        let (mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0);
        for (k, p) in power.iter().enumerate() {
            let d = freq(k) - centroid;
            let w = p / total;
            c2 += w * d * d;
            c3 += w * d * d * d;
            c4 += w * d * d * d * d;
        }
        let (skew, kurt) = if is_flat(c2, fs) {
            (0.0, 0.0)
        } else {
            (c3 / c2.powf(1.5), c4 / (c2 * c2) - 3.0)
        };
        Ok([median, skew, kurt, energy])
    }
}

pub fn extract_spectral_features(samples: &[f64], fs: f64) -> Result<[f64; 4]> {
    SpectralExtractor::new(samples.len())?.extract(samples, fs)
}

pub fn feature_names(catalog: &StreamCatalog) -> Vec<String> {
    catalog
        .stream_names()
        .iter()
        .flat_map(|s| {
            TIME_FEATURES
                .iter()
                .chain(SPECTRAL_FEATURES.iter())
                .map(move |f| format!("{s}.{f}"))
        })
        .collect()
}

/// All features of one segment, in [`feature_names`] order.
pub fn segment_features(segment: &Segment, catalog: &StreamCatalog) -> Result<Vec<f64>> {
    let fs = segment.sample_rate_hz();
    let streams = synthesize_streams(segment, catalog, fs)?;
    let spectral = SpectralExtractor::new(segment.len())?;
    let mut row = Vec::with_capacity(streams.len() * FEATURES_PER_STREAM);
    for s in &streams {
        row.extend_from_slice(&extract_time_features(&s.samples)?);
        row.extend_from_slice(&spectral.extract(&s.samples, fs)?);
    }
    Ok(row)
}

pub fn build_feature_matrix(segments: &[Segment], catalog: &StreamCatalog) -> Result<FeatureMatrix> {
    let rows = segments
        .par_iter()
        .map(|s| segment_features(s, catalog))
        .collect::<Result<Vec<_>>>()?;
    let meta = segments
        .iter()
        .map(|s| RowMeta {
            trial_id: s.trial_id().to_string(),
            subject_id: s.subject_id().to_string(),
            label: s.label(),
        })
        .collect();
    FeatureMatrix::new(feature_names(catalog), rows.concat(), meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::TAU;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn time_features_hand_values() {
        let f = extract_time_features(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(&f[..4], &[2.5, 2.5, 1.0, 4.0]);
        // population std: sqrt(((1.5^2 + 0.5^2) * 2) / 4) = sqrt(1.25)
        assert!(close(f[4], 1.25f64.sqrt(), 1e-12));
        assert!(close(f[4], 1.1180, 1e-4));
        assert!(close(f[5], 0.0, 1e-12));
        // m4 = (2 * 1.5^4 + 2 * 0.5^4) / 4 = 2.5625, m2^2 = 1.5625
        assert!(close(f[6], 2.5625 / 1.5625 - 3.0, 1e-12));

        let c = extract_time_features(&[7.0, 7.0, 7.0]).unwrap();
        assert_eq!(c, [7.0, 7.0, 7.0, 7.0, 0.0, 0.0, 0.0]);
        assert_eq!(extract_time_features(&[-1.0, 0.0, 1.0]).unwrap()[5], 0.0);
        assert!(extract_time_features(&[1.0]).is_err());
        // right-skewed
        assert!(extract_time_features(&[0.0, 0.0, 0.0, 10.0]).unwrap()[5] > 0.0);
    }

    /// Direct O(n^2) DFT, independent of the FFT path.
    fn dft_power(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let a = TAU * (k * t) as f64 / n as f64;
                    re += v * a.cos();
                    im -= v * a.sin();
                }
                re * re + im * im
            })
            .collect()
    }

    #[test]
    fn sinusoid_spectral_median() {
        let x: Vec<f64> = (0..1000).map(|t| (TAU * 2.0 * t as f64 / 100.0).sin() + 3.0).collect();
        let centered: Vec<f64> = x.iter().map(|v| v - 3.0).collect();
        let power = dft_power(&centered);
        let peak = (0..power.len()).max_by(|&a, &b| power[a].total_cmp(&power[b])).unwrap();
        let peak_hz = peak as f64 * 100.0 / 1000.0;
        assert!(close(peak_hz, 2.0, 1e-12));
        let f = extract_spectral_features(&x, 100.0).unwrap();
        assert!(close(f[0], peak_hz, 1e-12));
    }

    #[test]
    fn constant_has_no_spectrum() {
        assert_eq!(extract_spectral_features(&[4.2; 16], 100.0).unwrap(), [0.0; 4]);
        assert!(extract_spectral_features(&[1.0, 2.0, 3.0], 100.0).is_err());
    }

    #[test]
    fn power_spectrum_matches_direct_dft() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [8usize, 9, 31, 64] {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mean = x.iter().sum::<f64>() / n as f64;
            let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
            let direct = dft_power(&centered);
            let fft = SpectralExtractor::new(n).unwrap().power_spectrum(&x);
            for k in 0..direct.len() {
                let paired = k != 0 && !(n % 2 == 0 && k == n / 2);
                let want = if paired { 2.0 } else { 1.0 } * direct[k] / n as f64;
                assert!(close(fft[k], want, 1e-9), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn parseval_energy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for i in 0..100 {
            let n = rng.random_range(4..600);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0) + i as f64).collect();
            let mean = x.iter().sum::<f64>() / n as f64;
            let oracle = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let energy = extract_spectral_features(&x, 100.0).unwrap()[3];
            assert!(close(energy, oracle, 1e-6), "{energy} vs {oracle}");
        }
    }

    #[test]
    fn two_tone_skew_sign() {
        // more power in the low tone puts the tail on the high side
        let x: Vec<f64> = (0..1000)
            .map(|t| {
                let s = t as f64 / 100.0;
                3.0 * (TAU * 1.0 * s).sin() + (TAU * 20.0 * s).sin()
            })
            .collect();
        let f = extract_spectral_features(&x, 100.0).unwrap();
        assert_eq!(f[0], 1.0);
        assert!(f[1] > 0.0);
    }
}
