//! The acceptance gate: one test per shipping criterion, each printing a
//! single pass/fail line with the measured values (visible under
//! `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria:
//!   1. momentum at zero reproduces the plain algorithm bit-for-bit
//!   2. 30 accelerated iterations match 60 plain iterations on every
//!      bundled clip (final spectral convergence within 5%)
//!   3. benchmark mean delay reduction of the 30-vs-60 comparison lands
//!      in [25, 60] percent
//!   4. frequency-domain overlays: accelerated 30-vs-60 distance below
//!      half the plain 30-vs-60 distance on every bundled clip
//!   5. plain-algorithm residual traces never increase
//!   6. transform correctness: naive-DFT agreement, exact roundtrips,
//!      projection idempotence
//!   7. WAV codec: byte idempotence, quantization bounds, and survival of
//!      1000 mutated headers
//!   8. rerun determinism of the reconstruction command

mod common;

use common::{
    corpus_dir, load_clip, max_rel_diff, naive_stft, random_magnitudes, random_signal,
    small_config, CLIP_NAMES,
};
use phasefast::metrics::{fft_overlay, overlay_distance, snr_db, spectral_convergence};
use phasefast::reconstruct::{
    project_consistent, project_magnitude, reconstruct, reconstruct_to_len, Algorithm,
    InitStrategy, ReconstructionParams,
};
use phasefast::stft::{analyze, magnitude, synthesize, MagnitudeSpectrogram, Signal, StftConfig};
use phasefast::wav::{read_wav, write_wav, WavFile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

const OVERLAY_LENGTH: usize = 65536;

fn params(iterations: usize, alpha: f64) -> ReconstructionParams {
    ReconstructionParams {
        iterations,
        alpha,
        init: InitStrategy::ZeroPhase,
        tolerance: None,
    }
}

struct ClipRuns {
    name: &'static str,
    sc_fast30: f64,
    sc_plain60: f64,
    overlay_fast: f64,
    overlay_plain: f64,
    plain60_trace: Vec<f64>,
}

/// The four reconstructions per bundled clip that criteria 2, 4, and 5
/// share: accelerated and plain at 30 and 60 iterations.
fn clip_runs() -> &'static Vec<ClipRuns> {
    static RUNS: OnceLock<Vec<ClipRuns>> = OnceLock::new();
    RUNS.get_or_init(|| {
        CLIP_NAMES
            .iter()
            .map(|name| {
                let clip = load_clip(name);
                let cfg = StftConfig::default_for_rate(clip.sample_rate());
                let s = magnitude(&analyze(&clip, &cfg).unwrap());
                let run = |algo: Algorithm, iterations: usize, alpha: f64| {
                    reconstruct_to_len(&s, algo, &params(iterations, alpha), clip.len(), |_| {
                        Ok(())
                    })
                    .unwrap()
                };
                let f30 = run(Algorithm::Fgla, 30, 0.2);
                let f60 = run(Algorithm::Fgla, 60, 0.2);
                let g30 = run(Algorithm::Gla, 30, 0.0);
                let g60 = run(Algorithm::Gla, 60, 0.0);
                let ov = |x: &Signal| fft_overlay(x, OVERLAY_LENGTH).unwrap();
                ClipRuns {
                    name: name.strip_suffix(".wav").unwrap_or(name).into(),
                    sc_fast30: spectral_convergence(&s, &f30.waveform).unwrap(),
                    sc_plain60: spectral_convergence(&s, &g60.waveform).unwrap(),
                    overlay_fast: overlay_distance(&ov(&f30.waveform), &ov(&f60.waveform))
                        .unwrap(),
                    overlay_plain: overlay_distance(&ov(&g30.waveform), &ov(&g60.waveform))
                        .unwrap(),
                    plain60_trace: g60.residual_trace,
                }
            })
            .collect()
    })
}

#[test]
fn c1_momentum_at_zero_reproduces_the_plain_algorithm() {
    let cfg = small_config(8000, 16, 64, 64);
    let mut worst_trace = 0.0f64;
    let mut worst_wave = 0.0f64;
    let mut compare = |s: &MagnitudeSpectrogram, iterations: usize| {
        let g = reconstruct(s, Algorithm::Gla, &params(iterations, 0.3), |_| Ok(())).unwrap();
        let f = reconstruct(s, Algorithm::Fgla, &params(iterations, 0.0), |_| Ok(())).unwrap();
        for (a, b) in g.residual_trace.iter().zip(&f.residual_trace) {
            worst_trace = worst_trace.max((a - b).abs() / b.max(1.0));
        }
        worst_wave = worst_wave.max(max_rel_diff(g.waveform.samples(), f.waveform.samples()));
    };
    for seed in 0..100u64 {
        let frames = 3 + (seed % 6) as usize;
        compare(&random_magnitudes(&cfg, frames, seed), 5);
    }
    for name in CLIP_NAMES {
        let clip = load_clip(name);
        let cfg = StftConfig::default_for_rate(clip.sample_rate());
        compare(&magnitude(&analyze(&clip, &cfg).unwrap()), 10);
    }
    assert!(
        worst_trace <= 1e-12 && worst_wave <= 1e-12,
        "largest relative deviation: traces {worst_trace:.3e}, waveforms {worst_wave:.3e}"
    );
    println!(
        "acceptance 1: momentum at zero reproduces the plain algorithm: pass \
         (100 random spectrograms + 5 clips, max trace dev {worst_trace:.1e}, \
         max waveform dev {worst_wave:.1e})"
    );
}

#[test]
fn c2_thirty_accelerated_iterations_match_sixty_plain() {
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for runs in clip_runs() {
        let ratio = runs.sc_fast30 / runs.sc_plain60;
        lines.push(format!(
            "{}: fast-30 {:.6} vs plain-60 {:.6}, ratio {:.4}",
            runs.name, runs.sc_fast30, runs.sc_plain60, ratio
        ));
        if !(ratio <= 1.05) {
            failures.push(format!("{} ratio {ratio:.4} > 1.05", runs.name));
        }
    }
    if failures.is_empty() {
        println!(
            "acceptance 2: 30 accelerated iterations match 60 plain (within 5%): pass ({})",
            lines.join("; ")
        );
    } else {
        println!(
            "acceptance 2: 30 accelerated iterations match 60 plain (within 5%): fail ({})",
            failures.join("; ")
        );
        panic!("{}", failures.join("; "));
    }
}

#[test]
fn c3_benchmark_delay_reduction_is_in_range() {
    let report_dir = tempfile::tempdir().unwrap();
    let report_path = report_dir.path().join("report.json");
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_phasefast"))
        .args([
            "bench",
            "--corpus",
            corpus_dir().to_str().unwrap(),
            "--out",
            report_path.to_str().unwrap(),
            "--repeats",
            "10",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: phasefast::bench::BenchReport =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let reduction = report.aggregate.mean_delay_reduction_pct;
    let ok = (25.0..=60.0).contains(&reduction);
    println!(
        "acceptance 3: benchmark delay reduction in [25, 60]%: {} (measured {reduction:.2}%)",
        if ok { "pass" } else { "fail" }
    );
    assert!(ok, "mean delay reduction {reduction:.2}% outside [25, 60]");
}

#[test]
fn c4_accelerated_overlays_coincide_where_plain_do_not() {
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for runs in clip_runs() {
        let ratio = runs.overlay_fast / runs.overlay_plain;
        lines.push(format!(
            "{}: fast 30-vs-60 {:.4}, plain 30-vs-60 {:.4}, ratio {:.3}",
            runs.name, runs.overlay_fast, runs.overlay_plain, ratio
        ));
        if !(ratio < 0.5) {
            failures.push(format!("{} ratio {ratio:.3} >= 0.5", runs.name));
        }
    }
    if failures.is_empty() {
        println!(
            "acceptance 4: accelerated overlays within half the plain distance: pass ({})",
            lines.join("; ")
        );
    } else {
        println!(
            "acceptance 4: accelerated overlays within half the plain distance: fail ({})",
            lines.join("; ")
        );
        panic!(
            "overlay halving does not hold on this corpus: {}",
            failures.join("; ")
        );
    }
}

#[test]
fn c5_plain_residual_traces_never_increase() {
    let slack = 1e-9;
    let mut checked = 0usize;
    let mut check = |trace: &[f64], what: &str| {
        for w in trace.windows(2) {
            assert!(
                w[1] <= w[0] + slack,
                "{what}: residual rose {} -> {}",
                w[0],
                w[1]
            );
        }
        checked += 1;
    };
    for runs in clip_runs() {
        check(&runs.plain60_trace, runs.name);
    }
    let cfg = small_config(8000, 16, 64, 64);
    for seed in 0..100u64 {
        let frames = 3 + (seed % 8) as usize;
        let s = random_magnitudes(&cfg, frames, 50_000 + seed);
        let r = reconstruct(&s, Algorithm::Gla, &params(10, 0.0), |_| Ok(())).unwrap();
        check(&r.residual_trace, "random spectrogram");
    }
    println!(
        "acceptance 5: plain residual traces never increase: pass \
         ({checked} traces, slack {slack:.0e})"
    );
}

#[test]
fn c6_transforms_agree_with_naive_definitions() {
    // naive DFT agreement on 10 random short signals
    let mut worst_dft = 0.0f64;
    for seed in 0..10u64 {
        let cfg = small_config(8000, 25, 100, 128);
        let x = random_signal(seed, 400 + 61 * seed as usize, 8000);
        let fast = analyze(&x, &cfg).unwrap();
        let slow = naive_stft(&x, &cfg);
        let scale = slow.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1e-300);
        for (p, q) in fast.coefficients().iter().zip(&slow) {
            worst_dft = worst_dft.max((p - q).norm() / scale);
        }
    }
    assert!(worst_dft < 1e-6, "naive-DFT deviation {worst_dft:.3e}");

    // exact roundtrip on overlap-add-valid configurations
    let mut worst_snr = f64::INFINITY;
    let cases = [
        (StftConfig::default_for_rate(20000), 9000usize),
        (StftConfig::default_for_rate(8000), 4000),
        (small_config(16000, 128, 512, 512), 5000),
        (small_config(8000, 50, 150, 256), 1500),
    ];
    for (i, (cfg, len)) in cases.iter().enumerate() {
        let x = random_signal(900 + i as u64, *len, cfg.sample_rate);
        let y = synthesize(&analyze(&x, cfg).unwrap(), x.len()).unwrap();
        worst_snr = worst_snr.min(snr_db(&x, &y).unwrap());
    }
    assert!(worst_snr >= 120.0, "roundtrip snr {worst_snr:.1} dB");

    // both projections are idempotent
    let cfg = small_config(8000, 16, 64, 64);
    let s = random_magnitudes(&cfg, 6, 31);
    let c0 = phasefast::reconstruct::init_coefficients(&s, InitStrategy::RandomPhase { seed: 3 });
    let p1 = project_magnitude(&c0, &s).unwrap();
    let p2 = project_magnitude(&p1, &s).unwrap();
    let mut worst_proj = p1
        .coefficients()
        .iter()
        .zip(p2.coefficients())
        .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
    let q1 = project_consistent(&p1).unwrap();
    let q2 = project_consistent(&q1).unwrap();
    let scale = q1.coefficients().iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1.0);
    worst_proj = worst_proj.max(
        q1.coefficients()
            .iter()
            .zip(q2.coefficients())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()))
            / scale,
    );
    assert!(worst_proj <= 1e-12, "projection idempotence deviation {worst_proj:.3e}");

    println!(
        "acceptance 6: transform correctness: pass (naive-DFT dev {worst_dft:.1e}, \
         worst roundtrip {worst_snr:.0} dB, projection idempotence dev {worst_proj:.1e})"
    );
}

#[test]
fn c7_wav_codec_is_robust_and_lossless_at_its_grid() {
    // byte idempotence and quantization bound
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples: Vec<f64> = (0..2000).map(|_| rng.gen_range(-1.2..1.2)).collect();
    let (bytes1, _clipped) = write_wav(&WavFile {
        sample_rate: 8000,
        samples: samples.clone(),
    });
    let decoded = read_wav(&bytes1).unwrap();
    for (&x, &y) in samples.iter().zip(&decoded.samples) {
        let clamped = x.clamp(-1.0, 32767.0 / 32768.0);
        assert!(
            (clamped - y).abs() <= 0.5 / 32768.0 + 1e-12,
            "quantization bound violated: {x} -> {y}"
        );
    }
    let (bytes2, _) = write_wav(&decoded);
    assert_eq!(bytes1, bytes2, "write-read-write changed bytes");

    // 1000 mutated headers: every outcome is a value, never a crash
    let mut parse_errors = 0usize;
    let mut survived = 0usize;
    for round in 0..1000u64 {
        let mut mutated = bytes1.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(round);
        for _ in 0..=rng.gen_range(0..4) {
            let pos = rng.gen_range(0..60.min(mutated.len()));
            mutated[pos] = rng.gen();
        }
        if rng.gen_bool(0.3) {
            mutated.truncate(rng.gen_range(0..mutated.len()));
        }
        match read_wav(&mutated) {
            Ok(_) => survived += 1,
            Err(e) => {
                assert!(!e.to_string().is_empty());
                parse_errors += 1;
            }
        }
    }
    assert_eq!(parse_errors + survived, 1000);
    println!(
        "acceptance 7: WAV codec robustness: pass (idempotent bytes, quantization \
         within half a step, 1000 mutated headers -> {parse_errors} structured errors, \
         {survived} benign)"
    );
}

#[test]
fn c8_reconstruction_runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus_dir().join("clip01.wav");
    let mut wavs = Vec::new();
    let mut traces = Vec::new();
    for run in 0..2 {
        let wav = dir.path().join(format!("out{run}.wav"));
        let csv = dir.path().join(format!("trace{run}.csv"));
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_phasefast"))
            .args([
                "reconstruct",
                input.to_str().unwrap(),
                wav.to_str().unwrap(),
                "--init",
                "random",
                "--seed",
                "123",
                "--iterations",
                "10",
                "--trace",
                csv.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        wavs.push(std::fs::read(&wav).unwrap());
        let without_timing: Vec<String> = std::fs::read_to_string(&csv)
            .unwrap()
            .lines()
            .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(","))
            .collect();
        traces.push(without_timing);
    }
    assert_eq!(wavs[0], wavs[1], "output WAV bytes differ between reruns");
    assert_eq!(traces[0], traces[1], "residual traces differ between reruns");
    println!(
        "acceptance 8: reconstruction reruns are deterministic: pass \
         (byte-identical WAV, identical residual trace)"
    );
}
