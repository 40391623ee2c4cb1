//! Minimal WAV codec for 16-bit PCM mono files.
//!
//! The reader walks RIFF chunks with bounds checks and reports parse errors
//! with the byte offset where decoding failed. The writer emits a canonical
//! 44-byte header (RIFF, fmt, data) and quantizes with round-half-away-from-zero,
//! clamping out-of-range samples to the i16 limits. Clipping is silent but the
//! clipped-sample count is returned to the caller.

use thiserror::Error;

/// Fixed-point scale: sample word k decodes to k / 32768, and a real value v
/// encodes to round(v * 32768) before clamping. Using one scale in both
/// directions makes write(read(write(w))) byte-identical to write(w).
const SCALE: f64 = 32768.0;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("wav parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
    #[error("unsupported wav format: {field} = {value} (only 16-bit PCM mono is supported)")]
    Unsupported { field: &'static str, value: u32 },
}

/// Decoded mono PCM16 file: normalized samples plus the declared sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct WavFile {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

fn parse_err(offset: usize, reason: impl Into<String>) -> WavError {
    WavError::Parse {
        offset,
        reason: reason.into(),
    }
}

fn take<'a>(bytes: &'a [u8], offset: usize, len: usize, what: &str) -> Result<&'a [u8], WavError> {
    bytes
        .get(offset..offset + len)
        .ok_or_else(|| parse_err(offset, format!("truncated while reading {what}")))
}

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32, WavError> {
    let b = take(bytes, offset, 4, what)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

fn read_u16(bytes: &[u8], offset: usize, what: &str) -> Result<u16, WavError> {
    let b = take(bytes, offset, 2, what)?;
    Ok(u16::from_le_bytes([b[0], b[1]]))
}

/// Parses a RIFF/WAVE byte stream holding 16-bit PCM mono audio.
///
/// Sample words are mapped to reals via k / 32768. Unknown chunks before the
/// data chunk are skipped; a malformed or truncated header yields a
/// [`WavError::Parse`] with the failing byte offset, and any format other
/// than 16-bit PCM mono yields [`WavError::Unsupported`].
pub fn read_wav(bytes: &[u8]) -> Result<WavFile, WavError> {
    if take(bytes, 0, 4, "RIFF tag")? != b"RIFF" {
        return Err(parse_err(0, "missing RIFF tag"));
    }
    let riff_size = read_u32(bytes, 4, "RIFF size")? as usize;
    if riff_size.saturating_add(8) > bytes.len() {
        return Err(parse_err(
            4,
            format!(
                "RIFF size {} exceeds stream length {}",
                riff_size,
                bytes.len()
            ),
        ));
    }
    if take(bytes, 8, 4, "WAVE tag")? != b"WAVE" {
        return Err(parse_err(8, "missing WAVE tag"));
    }

    let mut offset = 12usize;
    let mut fmt: Option<(u32, u16)> = None;
    loop {
        let id_off = offset;
        let id = take(bytes, offset, 4, "chunk id")?;
        let size = read_u32(bytes, offset + 4, "chunk size")? as usize;
        let body = offset + 8;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(parse_err(id_off, format!("fmt chunk too short: {size}")));
                }
                let format_tag = read_u16(bytes, body, "format tag")?;
                if format_tag != 1 {
                    return Err(WavError::Unsupported {
                        field: "format tag",
                        value: format_tag as u32,
                    });
                }
                let channels = read_u16(bytes, body + 2, "channel count")?;
                if channels != 1 {
                    return Err(WavError::Unsupported {
                        field: "channels",
                        value: channels as u32,
                    });
                }
                let sample_rate = read_u32(bytes, body + 4, "sample rate")?;
                if sample_rate == 0 {
                    return Err(parse_err(body + 4, "sample rate is zero"));
                }
                let bits = read_u16(bytes, body + 14, "bits per sample")?;
                if bits != 16 {
                    return Err(WavError::Unsupported {
                        field: "bits per sample",
                        value: bits as u32,
                    });
                }
                fmt = Some((sample_rate, bits));
            }
            b"data" => {
                let (sample_rate, _) = fmt.ok_or_else(|| {
                    parse_err(id_off, "data chunk appears before fmt chunk")
                })?;
                if size % 2 != 0 {
                    return Err(parse_err(
                        id_off + 4,
                        format!("data chunk size {size} is not a whole number of samples"),
                    ));
                }
                let payload = take(bytes, body, size, "sample data")?;
                let samples = payload
                    .chunks_exact(2)
                    .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / SCALE)
                    .collect();
                return Ok(WavFile {
                    sample_rate,
                    samples,
                });
            }
            _ => {
                take(bytes, body, size, "chunk body")?;
            }
        }
        // Chunk bodies are word-aligned; odd sizes carry a pad byte.
        offset = body + size + (size % 2);
        if offset >= bytes.len() {
            return Err(parse_err(offset, "no data chunk found"));
        }
    }
}

/// Encodes samples as a canonical 44-byte-header RIFF/WAVE PCM16 mono stream.
///
/// Returns the byte stream and the number of samples that fell outside the
/// representable range and were clamped to [-32768, 32767].
pub fn write_wav(wav: &WavFile) -> (Vec<u8>, usize) {
    let mut clipped = 0usize;
    let data_len = wav.samples.len() * 2;
    let mut bytes = Vec::with_capacity(44 + data_len);
    bytes.extend_from_slice(b"RIFF");
    bytes.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    bytes.extend_from_slice(b"WAVE");
    bytes.extend_from_slice(b"fmt ");
    bytes.extend_from_slice(&16u32.to_le_bytes());
    bytes.extend_from_slice(&1u16.to_le_bytes());
    bytes.extend_from_slice(&1u16.to_le_bytes());
    bytes.extend_from_slice(&wav.sample_rate.to_le_bytes());
    bytes.extend_from_slice(&(wav.sample_rate * 2).to_le_bytes());
    bytes.extend_from_slice(&2u16.to_le_bytes());
    bytes.extend_from_slice(&16u16.to_le_bytes());
    bytes.extend_from_slice(b"data");
    bytes.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &v in &wav.samples {
        let scaled = (v * SCALE).round();
        let word = if scaled < i16::MIN as f64 {
            clipped += 1;
            i16::MIN
        } else if scaled > i16::MAX as f64 {
            clipped += 1;
            i16::MAX
        } else {
            scaled as i16
        };
        bytes.extend_from_slice(&word.to_le_bytes());
    }
    (bytes, clipped)
}
