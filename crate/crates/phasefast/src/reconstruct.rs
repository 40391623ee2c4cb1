//! Phase reconstruction from magnitude spectrograms by alternating projections.
//!
//! Both algorithms alternate the magnitude projection P_mag (replace moduli,
//! keep phases) with the consistency projection P_con (analyze∘synthesize).
//! Griffin-Lim iterates the composition directly; the fast variant adds a
//! momentum step c_i = t_i + alpha*(t_i - t_{i-1}) that extrapolates along the
//! direction of travel. alpha = 0 recovers Griffin-Lim exactly, so both run
//! through one engine.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::stft::{
    analyze, synthesize, ComplexSpectrogram, MagnitudeSpectrogram, Signal, StftError,
};

pub type ObserverError = Box<dyn std::error::Error + Send + Sync + 'static>;

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("invalid parameter: iterations must be at least 1")]
    ZeroIterations,
    #[error("invalid parameter: alpha {0} is outside the valid range [0, 1)")]
    AlphaOutOfRange(f64),
    #[error("invalid parameter: tolerance must be finite and non-negative, got {0}")]
    BadTolerance(f64),
    #[error("unknown algorithm {0:?}, expected \"gla\" or \"fgla\"")]
    UnknownAlgorithm(String),
    #[error(transparent)]
    Stft(#[from] StftError),
    #[error("observer failed at iteration {iteration}: {source}")]
    Observer {
        iteration: usize,
        #[source]
        source: ObserverError,
    },
}

/// How the initial coefficient matrix c_0 gets its phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// c_0 = s: every phase is 0.
    ZeroPhase,
    /// c_0 = s*e^{i*theta}, theta uniform in [0, 2pi) from a seeded generator,
    /// drawn in row-major order (bin-by-bin across frames).
    RandomPhase { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionParams {
    pub iterations: usize,
    /// Momentum coefficient in [0, 1). Ignored by gla (treated as 0).
    pub alpha: f64,
    pub init: InitStrategy,
    /// Optional early stop: end the loop once the residual drops below this.
    /// None (the default) runs the fixed iteration count.
    pub tolerance: Option<f64>,
}

impl ReconstructionParams {
    pub fn new(iterations: usize) -> ReconstructionParams {
        ReconstructionParams {
            iterations,
            alpha: 0.2,
            init: InitStrategy::ZeroPhase,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Gla,
    Fgla,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Gla => "gla",
            Algorithm::Fgla => "fgla",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = ReconstructError;

    fn from_str(s: &str) -> Result<Algorithm, ReconstructError> {
        match s {
            "gla" => Ok(Algorithm::Gla),
            "fgla" => Ok(Algorithm::Fgla),
            other => Err(ReconstructError::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// Per-iteration report passed to the observer callback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationEvent {
    /// 1-based iteration index.
    pub iteration: usize,
    /// Relative residual ||abs(t_i) - s||_F / ||s||_F after the consistency
    /// projection.
    pub residual: f64,
    /// Wall-clock time of this iteration in milliseconds.
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub waveform: Signal,
    pub residual_trace: Vec<f64>,
    pub iter_times_ms: Vec<f64>,
    pub total_time_ms: f64,
    /// Effective parameters of the run (alpha is 0 for gla).
    pub params: ReconstructionParams,
}

/// P_mag: replaces each modulus with the target magnitude, keeping the phase.
/// A zero coefficient has no phase; it is defined as 0, so the output entry is
/// the (real, non-negative) target magnitude itself.
pub fn project_magnitude(
    c: &ComplexSpectrogram,
    s: &MagnitudeSpectrogram,
) -> Result<ComplexSpectrogram, ReconstructError> {
    check_same_shape(c, s)?;
    let coefficients = c
        .coefficients()
        .iter()
        .zip(s.magnitudes())
        .map(|(&z, &m)| {
            let n = z.norm();
            if n == 0.0 {
                Complex64::new(m, 0.0)
            } else {
                z * (m / n)
            }
        })
        .collect();
    Ok(ComplexSpectrogram::from_parts(
        coefficients,
        c.bins(),
        c.frames(),
        *c.config(),
    ))
}

/// P_con: projects onto the set of consistent spectrograms (those that are the
/// analysis of some real signal) via analyze(synthesize(c)). The synthesis
/// length is the canonical length implied by the frame count.
pub fn project_consistent(c: &ComplexSpectrogram) -> Result<ComplexSpectrogram, ReconstructError> {
    project_consistent_with_len(c, c.config().canonical_len(c.frames()))
}

/// P_con against an explicit synthesis length. The length must imply the same
/// frame count as `c`, otherwise the result has different dimensions.
pub fn project_consistent_with_len(
    c: &ComplexSpectrogram,
    target_len: usize,
) -> Result<ComplexSpectrogram, ReconstructError> {
    let x = synthesize(c, target_len)?;
    Ok(analyze(&x, c.config())?)
}

/// Builds the initial coefficient matrix c_0 with |c_0| = s entrywise.
pub fn init_coefficients(s: &MagnitudeSpectrogram, strategy: InitStrategy) -> ComplexSpectrogram {
    let bins = s.bins();
    let frames = s.frames();
    let mut coefficients = vec![Complex64::new(0.0, 0.0); bins * frames];
    match strategy {
        InitStrategy::ZeroPhase => {
            for (z, &m) in coefficients.iter_mut().zip(s.magnitudes()) {
                *z = Complex64::new(m, 0.0);
            }
        }
        InitStrategy::RandomPhase { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for m in 0..bins {
                for n in 0..frames {
                    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                    coefficients[n * bins + m] = Complex64::from_polar(s.get(m, n), theta);
                }
            }
        }
    }
    ComplexSpectrogram::from_parts(coefficients, bins, frames, *s.config())
}

/// Griffin-Lim: the momentum-free loop, i.e. the engine with alpha = 0.
pub fn gla<F>(
    s: &MagnitudeSpectrogram,
    params: &ReconstructionParams,
    observer: F,
) -> Result<ReconstructionResult, ReconstructError>
where
    F: FnMut(IterationEvent) -> Result<(), ObserverError>,
{
    run_engine(s, 0.0, params, default_len(s), observer)
}

/// Fast Griffin-Lim: alternating projections with momentum.
///
/// c_0 = init(s); warm-up t_0 = P_con(P_mag(c_0)) seeds both the iterate and
/// the momentum history; then for i = 1..=n: t_i = P_con(P_mag(c_{i-1})),
/// c_i = t_i + alpha*(t_i - t_{i-1}). The waveform is synthesized from the
/// final extrapolated c_n. The warm-up is not an iteration: it appears in
/// neither the residual trace nor the observer calls.
pub fn fgla<F>(
    s: &MagnitudeSpectrogram,
    params: &ReconstructionParams,
    observer: F,
) -> Result<ReconstructionResult, ReconstructError>
where
    F: FnMut(IterationEvent) -> Result<(), ObserverError>,
{
    run_engine(s, params.alpha, params, default_len(s), observer)
}

/// Dispatch wrapper over [`gla`] and [`fgla`].
pub fn reconstruct<F>(
    s: &MagnitudeSpectrogram,
    algo: Algorithm,
    params: &ReconstructionParams,
    observer: F,
) -> Result<ReconstructionResult, ReconstructError>
where
    F: FnMut(IterationEvent) -> Result<(), ObserverError>,
{
    reconstruct_to_len(s, algo, params, default_len(s), observer)
}

/// Dispatch wrapper with an explicit output length (e.g. the length of the
/// original signal the spectrogram was analyzed from).
pub fn reconstruct_to_len<F>(
    s: &MagnitudeSpectrogram,
    algo: Algorithm,
    params: &ReconstructionParams,
    target_len: usize,
    observer: F,
) -> Result<ReconstructionResult, ReconstructError>
where
    F: FnMut(IterationEvent) -> Result<(), ObserverError>,
{
    let alpha = match algo {
        Algorithm::Gla => 0.0,
        Algorithm::Fgla => params.alpha,
    };
    run_engine(s, alpha, params, target_len, observer)
}

fn default_len(s: &MagnitudeSpectrogram) -> usize {
    s.config().canonical_len(s.frames())
}

fn check_same_shape(
    c: &ComplexSpectrogram,
    s: &MagnitudeSpectrogram,
) -> Result<(), ReconstructError> {
    if c.bins() != s.bins() || c.frames() != s.frames() || c.config() != s.config() {
        return Err(ReconstructError::Stft(StftError::DimensionMismatch(
            format!(
                "coefficients are {}x{}, magnitudes are {}x{} (configs {}equal)",
                c.bins(),
                c.frames(),
                s.bins(),
                s.frames(),
                if c.config() == s.config() { "" } else { "un" },
            ),
        )));
    }
    Ok(())
}

fn relative_residual(t: &ComplexSpectrogram, s: &MagnitudeSpectrogram, s_norm: f64) -> f64 {
    if s_norm == 0.0 {
        return 0.0;
    }
    let bins = s.bins();
    let sq: f64 = t
        .coefficients()
        .iter()
        .zip(s.magnitudes())
        .enumerate()
        .map(|(i, (z, &m))| {
            let d = z.norm() - m;
            s.config().bin_weight(i % bins) * d * d
        })
        .sum();
    sq.sqrt() / s_norm
}

fn combine(t: &ComplexSpectrogram, t_prev: &ComplexSpectrogram, alpha: f64) -> ComplexSpectrogram {
    let coefficients = t
        .coefficients()
        .iter()
        .zip(t_prev.coefficients())
        .map(|(&ti, &tp)| ti + alpha * (ti - tp))
        .collect();
    ComplexSpectrogram::from_parts(coefficients, t.bins(), t.frames(), *t.config())
}

fn run_engine<F>(
    s: &MagnitudeSpectrogram,
    alpha: f64,
    params: &ReconstructionParams,
    target_len: usize,
    mut observer: F,
) -> Result<ReconstructionResult, ReconstructError>
where
    F: FnMut(IterationEvent) -> Result<(), ObserverError>,
{
    if params.iterations == 0 {
        return Err(ReconstructError::ZeroIterations);
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(ReconstructError::AlphaOutOfRange(alpha));
    }
    if let Some(tol) = params.tolerance {
        if !tol.is_finite() || tol < 0.0 {
            return Err(ReconstructError::BadTolerance(tol));
        }
    }

    let total_start = Instant::now();
    let s_norm = s.frobenius_norm();
    let c0 = init_coefficients(s, params.init);
    let mut t_prev = project_consistent_with_len(&project_magnitude(&c0, s)?, target_len)?;
    let mut c = t_prev.clone();

    let mut residual_trace = Vec::with_capacity(params.iterations);
    let mut iter_times_ms = Vec::with_capacity(params.iterations);
    for i in 1..=params.iterations {
        let iter_start = Instant::now();
        let t = project_consistent_with_len(&project_magnitude(&c, s)?, target_len)?;
        c = combine(&t, &t_prev, alpha);
        let elapsed_ms = iter_start.elapsed().as_secs_f64() * 1e3;
        let residual = relative_residual(&t, s, s_norm);
        residual_trace.push(residual);
        iter_times_ms.push(elapsed_ms);
        observer(IterationEvent {
            iteration: i,
            residual,
            elapsed_ms,
        })
        .map_err(|source| ReconstructError::Observer {
            iteration: i,
            source,
        })?;
        t_prev = t;
        if params.tolerance.is_some_and(|tol| residual < tol) {
            break;
        }
    }

    let waveform = synthesize(&c, target_len)?;
    Ok(ReconstructionResult {
        waveform,
        residual_trace,
        iter_times_ms,
        total_time_ms: total_start.elapsed().as_secs_f64() * 1e3,
        params: ReconstructionParams {
            alpha,
            ..*params
        },
    })
}
