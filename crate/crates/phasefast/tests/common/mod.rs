//! Helpers shared by the integration suites: an independent naive-DFT
//! transform to check the FFT path against, corpus loading, and random
//! fixture generators.

use num_complex::Complex64;
use phasefast::stft::{make_window, MagnitudeSpectrogram, Signal, StftConfig, WindowKind};
use phasefast::wav::read_wav;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

/// Repo-level corpus directory holding the bundled clips.
pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("..")
        .join("corpus")
}

pub fn load_clip(name: &str) -> Signal {
    let path = corpus_dir().join(name);
    let bytes = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let wav = read_wav(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Signal::new(wav.samples, wav.sample_rate).expect("bundled clip is finite")
}

pub const CLIP_NAMES: [&str; 5] = [
    "clip01.wav",
    "clip02.wav",
    "clip03.wav",
    "clip04.wav",
    "clip05.wav",
];

/// Transform computed from the definition: pad half a window of zeros on each
/// side, take frames every hop, window, and evaluate the DFT sums directly.
/// O(frames * fft^2), so keep inputs short.
pub fn naive_stft(x: &Signal, cfg: &StftConfig) -> Vec<Complex64> {
    let window = make_window(WindowKind::Hann, cfg.window_length).unwrap();
    let pad = cfg.window_length / 2;
    let mut padded = vec![0.0; x.len() + cfg.window_length];
    padded[pad..pad + x.len()].copy_from_slice(x.samples());

    let frames = cfg.frame_count(x.len());
    let bins = cfg.bins();
    let n_fft = cfg.fft_length;
    let mut out = Vec::with_capacity(frames * bins);
    for frame in 0..frames {
        let start = frame * cfg.hop_length;
        for m in 0..bins {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..cfg.window_length {
                let angle = -2.0 * std::f64::consts::PI * (m * t) as f64 / n_fft as f64;
                acc += padded[start + t] * window[t] * Complex64::new(angle.cos(), angle.sin());
            }
            out.push(acc);
        }
    }
    out
}

pub fn random_signal(seed: u64, len: usize, sample_rate: u32) -> Signal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..len).map(|_| rng.gen_range(-0.8..0.8)).collect();
    Signal::new(samples, sample_rate).unwrap()
}

/// A target magnitude matrix that is not the analysis of any particular
/// signal: uniform random non-negative entries.
pub fn random_magnitudes(cfg: &StftConfig, frames: usize, seed: u64) -> MagnitudeSpectrogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..cfg.bins() * frames).map(|_| rng.gen_range(0.0..1.0)).collect();
    MagnitudeSpectrogram::new(values, frames, *cfg).unwrap()
}

/// Largest entrywise difference relative to the larger signal's peak.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch: {} vs {}", a.len(), b.len());
    let scale = a
        .iter()
        .chain(b.iter())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1e-300);
    a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (&x, &y)| acc.max((x - y).abs()))
        / scale
}

/// A compact configuration that keeps the naive oracle affordable.
pub fn small_config(sample_rate: u32, hop: usize, window: usize, fft: usize) -> StftConfig {
    StftConfig {
        window_kind: WindowKind::Hann,
        window_length: window,
        hop_length: hop,
        fft_length: fft,
        padding: phasefast::stft::PaddingMode::ZeroEdge,
        sample_rate,
    }
}
