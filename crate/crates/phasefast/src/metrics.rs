//! Reconstruction quality and synthesis-delay measurement.

use std::time::Instant;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reconstruct::Algorithm;
use crate::stft::{analyze, magnitude, MagnitudeSpectrogram, Signal, StftError};

/// SNR values are capped here; an exactly-zero error would otherwise be +inf.
pub const SNR_CAP_DB: f64 = 300.0;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("undefined metric: {0}")]
    Undefined(&'static str),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("sample rate mismatch: {left} Hz vs {right} Hz")]
    SampleRateMismatch { left: u32, right: u32 },
    #[error("overlay length {0} must be a power of two and at least 2")]
    BadOverlayLength(usize),
    #[error(transparent)]
    Stft(#[from] StftError),
}

/// Wall-clock statistics over repeated timed runs, in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub runs: usize,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    pub stddev_ms: f64,
}

/// Everything needed to draw one convergence plot: the residual trajectory
/// and the global FFT magnitudes of the final waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub algo: Algorithm,
    pub iterations: usize,
    pub alpha: f64,
    pub residuals: Vec<f64>,
    pub fft_overlay: Vec<f64>,
}

/// Relative Frobenius distance between the target magnitudes and the
/// magnitudes of the signal's own analysis: ||magnitude(analyze(x)) - s|| / ||s||.
pub fn spectral_convergence(s: &MagnitudeSpectrogram, x: &Signal) -> Result<f64, MetricError> {
    let s_norm = s.frobenius_norm();
    if s_norm == 0.0 {
        return Err(MetricError::Undefined(
            "spectral convergence against an all-zero magnitude target",
        ));
    }
    let c = analyze(x, s.config())?;
    if c.frames() != s.frames() {
        return Err(MetricError::LengthMismatch {
            left: c.frames(),
            right: s.frames(),
        });
    }
    let m = magnitude(&c);
    let bins = s.bins();
    let sq: f64 = m
        .magnitudes()
        .iter()
        .zip(s.magnitudes())
        .enumerate()
        .map(|(i, (a, b))| s.config().bin_weight(i % bins) * (a - b) * (a - b))
        .sum();
    Ok(sq.sqrt() / s_norm)
}

/// Signal-to-noise ratio 10*log10(sum(ref^2)/sum((ref-est)^2)) in dB, capped
/// at [`SNR_CAP_DB`] (exact-zero error reports the cap).
pub fn snr_db(reference: &Signal, estimate: &Signal) -> Result<f64, MetricError> {
    if reference.len() != estimate.len() {
        return Err(MetricError::LengthMismatch {
            left: reference.len(),
            right: estimate.len(),
        });
    }
    if reference.sample_rate() != estimate.sample_rate() {
        return Err(MetricError::SampleRateMismatch {
            left: reference.sample_rate(),
            right: estimate.sample_rate(),
        });
    }
    let ref_energy: f64 = reference.samples().iter().map(|v| v * v).sum();
    if ref_energy == 0.0 {
        return Err(MetricError::Undefined("snr of an all-zero reference"));
    }
    let err_energy: f64 = reference
        .samples()
        .iter()
        .zip(estimate.samples())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if err_energy == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (ref_energy / err_energy).log10()).min(SNR_CAP_DB))
}

/// Global FFT magnitudes of the whole waveform for plot-overlap comparisons:
/// zero-pad or truncate to `length`, transform, return bins 0..=length/2.
pub fn fft_overlay(x: &Signal, length: usize) -> Result<Vec<f64>, MetricError> {
    if length < 2 || !length.is_power_of_two() {
        return Err(MetricError::BadOverlayLength(length));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); length];
    for (b, &v) in buf.iter_mut().zip(x.samples()) {
        *b = Complex64::new(v, 0.0);
    }
    FftPlanner::new().plan_fft_forward(length).process(&mut buf);
    Ok(buf[..length / 2 + 1].iter().map(|z| z.norm()).collect())
}

/// Relative L2 distance ||a - b|| / max(||a||, ||b||); 0 when both are zero.
pub fn overlay_distance(a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let denom = norm(a).max(norm(b));
    if denom == 0.0 {
        return Ok(0.0);
    }
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    Ok(diff / denom)
}

/// Runs `task` once untimed to warm caches, then `repeats` more times under a
/// monotonic clock. Returns the stats over the timed runs and the last run's
/// value. Panics if `repeats` is 0; a task failure aborts with its error.
pub fn time_synthesis<T, E>(
    mut task: impl FnMut() -> Result<T, E>,
    repeats: usize,
) -> Result<(TimingStats, T), E> {
    assert!(repeats >= 1, "time_synthesis needs at least one timed run");
    task()?;
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let value = task()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        last = Some(value);
    }
    let mean = times.iter().sum::<f64>() / repeats as f64;
    let variance = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / repeats as f64;
    Ok((
        TimingStats {
            runs: repeats,
            mean_ms: mean,
            min_ms: times.iter().cloned().fold(f64::INFINITY, f64::min),
            max_ms: times.iter().cloned().fold(0.0, f64::max),
            stddev_ms: variance.sqrt(),
        },
        last.expect("at least one timed run"),
    ))
}
