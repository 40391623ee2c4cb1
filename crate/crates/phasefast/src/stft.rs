//! STFT analysis and least-squares synthesis over a Gabor frame.
//!
//! `analyze` is the forward transform G: the signal is zero-padded by half a
//! window at each edge, sliced into hop-shifted frames, Hann-windowed, and
//! transformed with a real-input DFT keeping bins 0..fft_length/2. `synthesize`
//! is the dual-window pseudo-inverse G*: inverse DFT per frame, multiply by the
//! synthesis window, overlap-add, divide by the summed squared-window envelope.
//! That makes synthesize(analyze(x)) = x wherever the envelope is positive and
//! analyze∘synthesize an orthogonal projection onto consistent spectrograms.

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

/// Overlap-add envelope values at or below this are treated as a hard
/// non-invertible-config error rather than clamped.
pub const ENVELOPE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StftError {
    #[error("invalid config: window length {0} must be at least 2")]
    WindowTooShort(usize),
    #[error("invalid config: hop length {hop} must be in 1..={window}")]
    BadHop { hop: usize, window: usize },
    #[error("invalid config: fft length {fft} must be even and at least the window length {window}")]
    BadFftLength { fft: usize, window: usize },
    #[error("invalid config: sample rate must be positive")]
    ZeroSampleRate,
    #[error("sample rate mismatch: signal is {signal} Hz but config expects {config} Hz")]
    SampleRateMismatch { signal: u32, config: u32 },
    #[error("empty signal")]
    EmptySignal,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("negative magnitude {value} at index {index}")]
    NegativeMagnitude { index: usize, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(
        "non-invertible config (COLA violation): overlap-add envelope is {envelope:.3e} \
         at output sample {position}, below the {ENVELOPE_FLOOR:.0e} floor"
    )]
    NonInvertible { position: usize, envelope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaddingMode {
    ZeroEdge,
}

/// Gabor transform parameters. `hop_length` is the frame shift in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub window_kind: WindowKind,
    pub window_length: usize,
    pub hop_length: usize,
    pub fft_length: usize,
    pub padding: PaddingMode,
    pub sample_rate: u32,
}

impl StftConfig {
    /// Default framing for a sample rate: 12.5 ms hop, window of four hops,
    /// FFT length the next power of two at or above the window length.
    pub fn default_for_rate(sample_rate: u32) -> StftConfig {
        let hop = ((sample_rate as f64 * 0.0125).round() as usize).max(1);
        let window = 4 * hop;
        StftConfig {
            window_kind: WindowKind::Hann,
            window_length: window,
            hop_length: hop,
            fft_length: window.next_power_of_two(),
            padding: PaddingMode::ZeroEdge,
            sample_rate,
        }
    }

    pub fn validate(&self) -> Result<(), StftError> {
        if self.window_length < 2 {
            return Err(StftError::WindowTooShort(self.window_length));
        }
        if self.hop_length == 0 || self.hop_length > self.window_length {
            return Err(StftError::BadHop {
                hop: self.hop_length,
                window: self.window_length,
            });
        }
        if self.fft_length % 2 != 0 || self.fft_length < self.window_length {
            return Err(StftError::BadFftLength {
                fft: self.fft_length,
                window: self.window_length,
            });
        }
        if self.sample_rate == 0 {
            return Err(StftError::ZeroSampleRate);
        }
        Ok(())
    }

    /// Frequency bin count M = fft_length/2 + 1.
    pub fn bins(&self) -> usize {
        self.fft_length / 2 + 1
    }

    /// Frame count for a signal of `len` samples. With P = len + window_length
    /// padded samples, N = 1 + floor((P - window_length)/hop_length).
    pub fn frame_count(&self, len: usize) -> usize {
        1 + len / self.hop_length
    }

    /// Canonical signal length for an N-frame spectrogram when the true
    /// length is unknown: the smallest len with frame_count(len) = N.
    pub fn canonical_len(&self, frames: usize) -> usize {
        frames.saturating_sub(1) * self.hop_length
    }

    /// Multiplicity of a stored bin in the full conjugate-symmetric spectrum:
    /// interior bins also appear as negative-frequency conjugates, DC and
    /// Nyquist appear once.
    pub fn bin_weight(&self, bin: usize) -> f64 {
        if bin == 0 || bin == self.fft_length / 2 {
            1.0
        } else {
            2.0
        }
    }

    pub fn hop_ms(&self) -> f64 {
        self.hop_length as f64 * 1000.0 / self.sample_rate as f64
    }

    pub fn window_ms(&self) -> f64 {
        self.window_length as f64 * 1000.0 / self.sample_rate as f64
    }
}

/// Time-domain waveform with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Signal, StftError> {
        if sample_rate == 0 {
            return Err(StftError::ZeroSampleRate);
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(StftError::NonFinite(i));
        }
        Ok(Signal {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// M×N complex STFT coefficient matrix. Row m is frequency bin m, column n is
/// frame n; storage is frame-major (each frame's spectrum contiguous).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    coefficients: Vec<Complex64>,
    bins: usize,
    frames: usize,
    config: StftConfig,
}

impl ComplexSpectrogram {
    pub fn new(
        coefficients: Vec<Complex64>,
        frames: usize,
        config: StftConfig,
    ) -> Result<ComplexSpectrogram, StftError> {
        config.validate()?;
        let bins = config.bins();
        if coefficients.len() != bins * frames {
            return Err(StftError::DimensionMismatch(format!(
                "expected {bins}x{frames} = {} coefficients, got {}",
                bins * frames,
                coefficients.len()
            )));
        }
        if let Some(i) = coefficients
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(StftError::NonFinite(i));
        }
        Ok(ComplexSpectrogram {
            coefficients,
            bins,
            frames,
            config,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn get(&self, bin: usize, frame: usize) -> Complex64 {
        self.coefficients[frame * self.bins + bin]
    }

    /// Frame-major coefficient storage: entry (bin m, frame n) at n*bins + m.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Internal constructor for values already known to satisfy the
    /// dimension and finiteness invariants.
    pub(crate) fn from_parts(
        coefficients: Vec<Complex64>,
        bins: usize,
        frames: usize,
        config: StftConfig,
    ) -> ComplexSpectrogram {
        debug_assert_eq!(coefficients.len(), bins * frames);
        ComplexSpectrogram {
            coefficients,
            bins,
            frames,
            config,
        }
    }
}

/// M×N non-negative magnitude matrix, same layout as [`ComplexSpectrogram`].
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrogram {
    magnitudes: Vec<f64>,
    bins: usize,
    frames: usize,
    config: StftConfig,
}

impl MagnitudeSpectrogram {
    pub fn new(
        magnitudes: Vec<f64>,
        frames: usize,
        config: StftConfig,
    ) -> Result<MagnitudeSpectrogram, StftError> {
        config.validate()?;
        let bins = config.bins();
        if magnitudes.len() != bins * frames {
            return Err(StftError::DimensionMismatch(format!(
                "expected {bins}x{frames} = {} magnitudes, got {}",
                bins * frames,
                magnitudes.len()
            )));
        }
        for (i, &v) in magnitudes.iter().enumerate() {
            if !v.is_finite() {
                return Err(StftError::NonFinite(i));
            }
            if v < 0.0 {
                return Err(StftError::NegativeMagnitude { index: i, value: v });
            }
        }
        Ok(MagnitudeSpectrogram {
            magnitudes,
            bins,
            frames,
            config,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn get(&self, bin: usize, frame: usize) -> f64 {
        self.magnitudes[frame * self.bins + bin]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// Frobenius norm of the full conjugate-symmetric coefficient matrix the
    /// stored half-spectrum stands for: interior bins count twice. This is
    /// the norm in which alternating projections provably descend, so every
    /// residual and spectral distance is measured with it.
    pub fn frobenius_norm(&self) -> f64 {
        self.magnitudes
            .chunks_exact(self.bins)
            .flat_map(|frame| frame.iter().enumerate())
            .map(|(m, v)| self.config.bin_weight(m) * v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Builds the periodic analysis window w[n] = 0.5 - 0.5*cos(2*pi*n/length).
pub fn make_window(kind: WindowKind, length: usize) -> Result<Vec<f64>, StftError> {
    if length < 2 {
        return Err(StftError::WindowTooShort(length));
    }
    match kind {
        WindowKind::Hann => Ok((0..length)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / length as f64).cos())
            .collect()),
    }
}

/// Squared-window overlap-add envelope over one hop period in steady state.
fn envelope_period(window: &[f64], hop: usize) -> Vec<f64> {
    let mut env = vec![0.0; hop];
    for (t, e) in env.iter_mut().enumerate() {
        let mut pos = t;
        while pos < window.len() {
            *e += window[pos] * window[pos];
            pos += hop;
        }
    }
    env
}

/// Overlap-add validity report for a window/hop pair. `deviation` is the
/// relative spread 1 - min/max of the squared-window envelope (0 when the
/// envelope is exactly constant); `invertible` is whether the envelope stays
/// above [`ENVELOPE_FLOOR`], i.e. whether least-squares synthesis is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ColaReport {
    pub window_length: usize,
    pub hop_length: usize,
    pub min_envelope: f64,
    pub max_envelope: f64,
    pub deviation: f64,
    pub invertible: bool,
}

impl ColaReport {
    pub fn is_ok(&self) -> bool {
        self.invertible
    }
}

impl std::fmt::Display for ColaReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.invertible {
            write!(
                f,
                "OK: window {} hop {} envelope [{:.6}, {:.6}], deviation {:.3e}",
                self.window_length,
                self.hop_length,
                self.min_envelope,
                self.max_envelope,
                self.deviation
            )
        } else {
            write!(
                f,
                "violation: window {} hop {} envelope minimum {:.3e} below floor, deviation {:.3e}",
                self.window_length, self.hop_length, self.min_envelope, self.deviation
            )
        }
    }
}

/// Checks whether the window/hop pair admits exact overlap-add inversion.
pub fn validate_cola(cfg: &StftConfig) -> Result<ColaReport, StftError> {
    cfg.validate()?;
    let window = make_window(cfg.window_kind, cfg.window_length)?;
    let env = envelope_period(&window, cfg.hop_length);
    let min = env.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = env.iter().cloned().fold(0.0f64, f64::max);
    let deviation = if max > 0.0 { 1.0 - min / max } else { 1.0 };
    Ok(ColaReport {
        window_length: cfg.window_length,
        hop_length: cfg.hop_length,
        min_envelope: min,
        max_envelope: max,
        deviation,
        invertible: min > ENVELOPE_FLOOR,
    })
}

fn pad_signal(x: &[f64], window_length: usize) -> Vec<f64> {
    let pad_left = window_length / 2;
    let mut padded = vec![0.0; x.len() + window_length];
    padded[pad_left..pad_left + x.len()].copy_from_slice(x);
    padded
}

/// Forward transform G. Pads the signal, frames it at the hop stride, windows
/// each frame, and keeps DFT bins 0..=fft_length/2 per frame.
pub fn analyze(x: &Signal, cfg: &StftConfig) -> Result<ComplexSpectrogram, StftError> {
    cfg.validate()?;
    if x.sample_rate() != cfg.sample_rate {
        return Err(StftError::SampleRateMismatch {
            signal: x.sample_rate(),
            config: cfg.sample_rate,
        });
    }
    if x.is_empty() {
        return Err(StftError::EmptySignal);
    }
    let window = make_window(cfg.window_kind, cfg.window_length)?;
    let padded = pad_signal(x.samples(), cfg.window_length);
    let frames = cfg.frame_count(x.len());
    let bins = cfg.bins();
    let fft = FftPlanner::new().plan_fft_forward(cfg.fft_length);

    let mut coefficients = Vec::with_capacity(bins * frames);
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.fft_length];
    for n in 0..frames {
        let start = n * cfg.hop_length;
        for (t, b) in buf.iter_mut().enumerate().take(cfg.window_length) {
            *b = Complex64::new(padded[start + t] * window[t], 0.0);
        }
        for b in buf.iter_mut().skip(cfg.window_length) {
            *b = Complex64::new(0.0, 0.0);
        }
        fft.process(&mut buf);
        coefficients.extend_from_slice(&buf[..bins]);
    }
    Ok(ComplexSpectrogram {
        coefficients,
        bins,
        frames,
        config: *cfg,
    })
}

/// Inverse transform G*: the least-squares (dual-window) synthesis. Each frame
/// is extended to a full Hermitian spectrum, inverse-transformed, multiplied by
/// the synthesis window, and overlap-added; the accumulator is divided by the
/// summed squared-window envelope and trimmed to `target_len` samples.
pub fn synthesize(c: &ComplexSpectrogram, target_len: usize) -> Result<Signal, StftError> {
    let cfg = &c.config;
    cfg.validate()?;
    let window = make_window(cfg.window_kind, cfg.window_length)?;
    let full = cfg.fft_length;
    let bins = c.bins;
    let pad_left = cfg.window_length / 2;
    let padded_len = target_len + cfg.window_length;
    let span = c.frames.saturating_sub(1) * cfg.hop_length + cfg.window_length;
    let acc_len = padded_len.max(span);
    let ifft = FftPlanner::new().plan_fft_inverse(full);

    let mut acc = vec![0.0f64; acc_len];
    let mut env = vec![0.0f64; acc_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); full];
    for n in 0..c.frames {
        let col = &c.coefficients[n * bins..(n + 1) * bins];
        buf[..bins].copy_from_slice(col);
        for k in bins..full {
            buf[k] = col[full - k].conj();
        }
        ifft.process(&mut buf);
        let start = n * cfg.hop_length;
        for t in 0..cfg.window_length {
            acc[start + t] += buf[t].re / full as f64 * window[t];
            env[start + t] += window[t] * window[t];
        }
    }

    let mut samples = Vec::with_capacity(target_len);
    for t in 0..target_len {
        let pos = pad_left + t;
        if env[pos] <= ENVELOPE_FLOOR {
            return Err(StftError::NonInvertible {
                position: t,
                envelope: env[pos],
            });
        }
        samples.push(acc[pos] / env[pos]);
    }
    Ok(Signal {
        samples,
        sample_rate: cfg.sample_rate,
    })
}

/// Entrywise complex modulus; the config is carried through.
pub fn magnitude(c: &ComplexSpectrogram) -> MagnitudeSpectrogram {
    MagnitudeSpectrogram {
        magnitudes: c.coefficients.iter().map(|z| z.norm()).collect(),
        bins: c.bins,
        frames: c.frames,
        config: c.config,
    }
}
