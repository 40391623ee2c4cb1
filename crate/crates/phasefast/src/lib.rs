//! Spectrogram inversion toolkit: STFT analysis/synthesis over a Gabor frame,
//! Griffin-Lim and fast Griffin-Lim phase reconstruction, quality metrics,
//! a PCM16 WAV codec, and a benchmark harness for synthesis delay.

pub mod bench;
pub mod corpus;
pub mod metrics;
pub mod reconstruct;
pub mod specfile;
pub mod stft;
pub mod wav;
