//! Paired GLA/FGLA synthesis-delay benchmark over a clip corpus.
//!
//! Every clip is analyzed once; each algorithm then reconstructs the
//! magnitude spectrogram with one untimed warm-up run plus `repeats` timed
//! runs, strictly sequentially. The aggregate delay reduction is
//! 100*(1 - mean_fgla/mean_gla) with both means taken over the paired
//! per-clip mean times.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{snr_db, spectral_convergence, time_synthesis, MetricError, TimingStats};
use crate::reconstruct::{
    reconstruct_to_len, Algorithm, InitStrategy, ReconstructError, ReconstructionParams,
};
use crate::stft::{analyze, magnitude, Signal, StftConfig, StftError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("corpus contains no clips")]
    EmptyCorpus,
    #[error("repeats must be at least 1")]
    ZeroRepeats,
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Stft(#[from] StftError),
}

/// One corpus entry: the reference waveform and the transform it is
/// benchmarked under.
#[derive(Debug, Clone)]
pub struct BenchClip {
    pub name: String,
    pub signal: Signal,
    pub config: StftConfig,
}

#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub gla_iterations: usize,
    pub fgla_iterations: usize,
    pub alpha: f64,
    pub repeats: usize,
    pub init: InitStrategy,
}

impl Default for BenchOptions {
    fn default() -> BenchOptions {
        BenchOptions {
            gla_iterations: 60,
            fgla_iterations: 30,
            alpha: 0.2,
            repeats: 10,
            init: InitStrategy::ZeroPhase,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub algo: String,
    pub iterations: usize,
    pub alpha: f64,
    pub timing: TimingStats,
    pub final_spectral_convergence: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean_delay_reduction_pct: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub clips: Vec<ClipRecord>,
    pub aggregate: Aggregate,
}

impl BenchReport {
    /// Recomputes the aggregate from the records; a well-formed report gets
    /// back exactly its own aggregate value.
    pub fn recompute_delay_reduction(&self) -> Option<f64> {
        let mean_of = |algo: &str| {
            let times: Vec<f64> = self
                .clips
                .iter()
                .filter(|r| r.algo == algo)
                .map(|r| r.timing.mean_ms)
                .collect();
            if times.is_empty() {
                None
            } else {
                Some(times.iter().sum::<f64>() / times.len() as f64)
            }
        };
        let gla = mean_of("gla")?;
        let fgla = mean_of("fgla")?;
        Some(100.0 * (1.0 - fgla / gla))
    }
}

pub fn run_bench(clips: &[BenchClip], opts: &BenchOptions) -> Result<BenchReport, BenchError> {
    if clips.is_empty() {
        return Err(BenchError::EmptyCorpus);
    }
    if opts.repeats == 0 {
        return Err(BenchError::ZeroRepeats);
    }

    let variants = [
        (Algorithm::Gla, opts.gla_iterations, 0.0),
        (Algorithm::Fgla, opts.fgla_iterations, opts.alpha),
    ];
    let mut records = Vec::with_capacity(clips.len() * variants.len());
    for clip in clips {
        let s = magnitude(&analyze(&clip.signal, &clip.config)?);
        for (algo, iterations, alpha) in variants {
            let params = ReconstructionParams {
                iterations,
                alpha,
                init: opts.init,
                tolerance: None,
            };
            let (timing, last) = time_synthesis(
                || reconstruct_to_len(&s, algo, &params, clip.signal.len(), |_| Ok(())),
                opts.repeats,
            )?;
            records.push(ClipRecord {
                clip_id: clip.name.clone(),
                algo: algo.name().to_string(),
                iterations,
                alpha,
                timing,
                final_spectral_convergence: spectral_convergence(&s, &last.waveform)?,
                snr_db: snr_db(&clip.signal, &last.waveform)?,
            });
        }
    }

    let report = BenchReport {
        aggregate: Aggregate {
            mean_delay_reduction_pct: 0.0,
        },
        clips: records,
    };
    let pct = report
        .recompute_delay_reduction()
        .expect("both algorithms ran");
    Ok(BenchReport {
        aggregate: Aggregate {
            mean_delay_reduction_pct: pct,
        },
        ..report
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn report_shape_and_self_consistency() {
        let rate = 8000;
        let clip = corpus::synthesize_clip(&corpus::CLIPS[0], rate);
        let clips = vec![
            BenchClip {
                name: "a".into(),
                signal: clip.clone(),
                config: StftConfig::default_for_rate(rate),
            },
            BenchClip {
                name: "b".into(),
                signal: clip,
                config: StftConfig::default_for_rate(rate),
            },
        ];
        let opts = BenchOptions {
            gla_iterations: 4,
            fgla_iterations: 2,
            repeats: 2,
            ..BenchOptions::default()
        };
        let report = run_bench(&clips, &opts).unwrap();
        assert_eq!(report.clips.len(), 4);
        assert!(report
            .clips
            .iter()
            .all(|r| r.clip_id == "a" || r.clip_id == "b"));
        assert!(report.clips.iter().all(|r| r.timing.runs == 2));
        let recomputed = report.recompute_delay_reduction().unwrap();
        assert_eq!(recomputed, report.aggregate.mean_delay_reduction_pct);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            run_bench(&[], &BenchOptions::default()),
            Err(BenchError::EmptyCorpus)
        ));
    }
}
