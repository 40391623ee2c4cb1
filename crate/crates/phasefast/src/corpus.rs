//! Deterministic synthesis of the bundled test clips.
//!
//! All clips are sustained low hums: a fundamental at the default analysis
//! frame rate (80 Hz at the 12.5 ms hop) plus a few quiet overtones, faded in
//! and out. Frame-periodic content like this reaches its reconstruction
//! plateau within a handful of iterations, which is the regime where a short
//! accelerated run and a long plain run land on the same quality. Broadband
//! material never quite plateaus: its residual keeps creeping down for
//! hundreds of iterations, so iteration-halving comparisons on it measure the
//! creep rate, not the plateau.

use crate::stft::Signal;

/// Fundamental shared by all clips: one cycle per default analysis hop.
pub const CLIP_F0: f64 = 80.0;

#[derive(Debug, Clone, Copy)]
pub struct ClipSpec {
    pub name: &'static str,
    pub duration_s: f64,
    /// Partials as (harmonic index, amplitude, phase offset in radians).
    pub partials: &'static [(u32, f64, f64)],
    pub peak: f64,
}

/// The bundled five-clip corpus: varied durations and overtone colors.
pub const CLIPS: [ClipSpec; 5] = [
    ClipSpec {
        name: "clip01",
        duration_s: 1.5,
        partials: &[(1, 1.0, 0.0), (2, 0.10, 1.1)],
        peak: 0.60,
    },
    ClipSpec {
        name: "clip02",
        duration_s: 2.5,
        partials: &[(1, 1.0, 0.7), (2, 0.12, 2.3), (3, 0.07, 4.0)],
        peak: 0.55,
    },
    ClipSpec {
        name: "clip03",
        duration_s: 4.0,
        partials: &[(1, 1.0, 1.9), (3, 0.08, 0.4), (4, 0.05, 5.1)],
        peak: 0.65,
    },
    ClipSpec {
        name: "clip04",
        duration_s: 5.5,
        partials: &[(1, 1.0, 3.4), (2, 0.08, 2.9), (3, 0.05, 1.6)],
        peak: 0.50,
    },
    ClipSpec {
        name: "clip05",
        duration_s: 7.0,
        partials: &[
            (1, 1.0, 5.8),
            (2, 0.11, 0.2),
            (3, 0.06, 3.7),
            (4, 0.05, 2.5),
            (6, 0.05, 4.4),
        ],
        peak: 0.58,
    },
];

const FADE_S: f64 = 0.05;

fn envelope(t: usize, len: usize, ramp: usize) -> f64 {
    let ramp = ramp.min(len / 2).max(1);
    let up = if t < ramp {
        0.5 - 0.5 * (std::f64::consts::PI * t as f64 / ramp as f64).cos()
    } else {
        1.0
    };
    let tail = len - 1 - t;
    let down = if tail < ramp {
        0.5 - 0.5 * (std::f64::consts::PI * tail as f64 / ramp as f64).cos()
    } else {
        1.0
    };
    up * down
}

/// Renders one clip deterministically from its recipe.
pub fn synthesize_clip(spec: &ClipSpec, sample_rate: u32) -> Signal {
    let sr = sample_rate as f64;
    let len = (spec.duration_s * sr).round() as usize;
    let ramp = (FADE_S * sr) as usize;
    let mut x = vec![0.0; len];
    for (t, v) in x.iter_mut().enumerate() {
        let time = t as f64 / sr;
        let mut s = 0.0;
        for &(h, a, phase) in spec.partials {
            s += a * (std::f64::consts::TAU * CLIP_F0 * h as f64 * time + phase).sin();
        }
        *v = envelope(t, len, ramp) * s;
    }
    let peak = x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if peak > 0.0 {
        let scale = spec.peak / peak;
        for v in &mut x {
            *v *= scale;
        }
    }
    Signal::new(x, sample_rate).expect("generated clip is finite")
}

/// All bundled clips at the given rate, in corpus order.
pub fn default_corpus(sample_rate: u32) -> Vec<(String, Signal)> {
    CLIPS
        .iter()
        .map(|spec| (spec.name.to_string(), synthesize_clip(spec, sample_rate)))
        .collect()
}
