//! On-disk magnitude-spectrogram format: a small JSON header describing the
//! transform geometry plus a sidecar binary holding the matrix as row-major
//! little-endian f32 values. The sidecar sits next to the header with a
//! `.bin` extension in place of the header's.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stft::{MagnitudeSpectrogram, PaddingMode, StftConfig, StftError, WindowKind};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0}, expected {FORMAT_VERSION}")]
    BadVersion(u32),
    #[error("header declares bins {declared} but the config implies {implied}")]
    BinsMismatch { declared: usize, implied: usize },
    #[error("payload holds {got} values but the header implies {expected}")]
    PayloadSize { expected: usize, got: usize },
    #[error(transparent)]
    Stft(#[from] StftError),
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    version: u32,
    sample_rate: u32,
    window_length: usize,
    hop_length: usize,
    fft_length: usize,
    bins: usize,
    frames: usize,
}

fn sidecar_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("bin")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SpecFileError + '_ {
    move |source| SpecFileError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the header JSON at `path` and the payload at the sibling `.bin`.
pub fn write_spectrogram(path: &Path, s: &MagnitudeSpectrogram) -> Result<(), SpecFileError> {
    let cfg = s.config();
    let header = Header {
        version: FORMAT_VERSION,
        sample_rate: cfg.sample_rate,
        window_length: cfg.window_length,
        hop_length: cfg.hop_length,
        fft_length: cfg.fft_length,
        bins: s.bins(),
        frames: s.frames(),
    };
    fs::write(path, serde_json::to_vec_pretty(&header)?).map_err(io_err(path))?;

    let mut payload = Vec::with_capacity(s.bins() * s.frames() * 4);
    for m in 0..s.bins() {
        for n in 0..s.frames() {
            payload.extend_from_slice(&(s.get(m, n) as f32).to_le_bytes());
        }
    }
    let bin = sidecar_path(path);
    fs::write(&bin, payload).map_err(io_err(&bin))?;
    Ok(())
}

/// Reads a spectrogram written by [`write_spectrogram`].
pub fn read_spectrogram(path: &Path) -> Result<MagnitudeSpectrogram, SpecFileError> {
    let header: Header =
        serde_json::from_slice(&fs::read(path).map_err(io_err(path))?)?;
    if header.version != FORMAT_VERSION {
        return Err(SpecFileError::BadVersion(header.version));
    }
    let cfg = StftConfig {
        window_kind: WindowKind::Hann,
        window_length: header.window_length,
        hop_length: header.hop_length,
        fft_length: header.fft_length,
        padding: PaddingMode::ZeroEdge,
        sample_rate: header.sample_rate,
    };
    cfg.validate()?;
    if header.bins != cfg.bins() {
        return Err(SpecFileError::BinsMismatch {
            declared: header.bins,
            implied: cfg.bins(),
        });
    }

    let bin = sidecar_path(path);
    let payload = fs::read(&bin).map_err(io_err(&bin))?;
    let expected = header.bins * header.frames;
    if payload.len() != expected * 4 {
        return Err(SpecFileError::PayloadSize {
            expected,
            got: payload.len() / 4,
        });
    }
    let mut magnitudes = vec![0.0f64; expected];
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let m = i / header.frames;
        let n = i % header.frames;
        magnitudes[n * header.bins + m] =
            f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64;
    }
    Ok(MagnitudeSpectrogram::new(magnitudes, header.frames, cfg)?)
}
