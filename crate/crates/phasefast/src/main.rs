//! Command-line front end: reconstruct waveforms from magnitude spectrograms,
//! benchmark GLA against FGLA, dump convergence traces, and sanity-check STFT
//! framing.
//!
//! Exit codes: 0 success, 1 I/O or file decoding failure, 2 invalid
//! parameters, configuration, or validation failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phasefast::bench::{run_bench, BenchClip, BenchError, BenchOptions};
use phasefast::corpus;
use phasefast::metrics::{fft_overlay, overlay_distance, ConvergenceTrace, MetricError};
use phasefast::reconstruct::{
    reconstruct_to_len, Algorithm, InitStrategy, ReconstructError, ReconstructionParams,
    ReconstructionResult,
};
use phasefast::specfile::{read_spectrogram, write_spectrogram, SpecFileError};
use phasefast::stft::{
    analyze, magnitude, validate_cola, MagnitudeSpectrogram, PaddingMode, Signal, StftConfig,
    StftError, WindowKind,
};
use phasefast::wav::{read_wav, write_wav, WavError, WavFile};

const DEFAULT_SAMPLE_RATE: u32 = 20000;
const SEED_ENV: &str = "PHASEFAST_SEED";

#[derive(Parser)]
#[command(
    name = "phasefast",
    version,
    about = "Spectrogram inversion: Griffin-Lim and fast Griffin-Lim phase reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rebuild a waveform from a WAV file or a .json magnitude spectrogram
    Reconstruct(ReconstructArgs),
    /// Time gla against fgla over a corpus of WAV clips, write a JSON report
    Bench(BenchArgs),
    /// Write per-iteration residual traces and an FFT overlay table
    Convergence(ConvergenceArgs),
    /// Check an STFT configuration for invertible overlap-add coverage
    Validate(ValidateArgs),
    /// Write the built-in synthetic clip set as WAV files
    GenCorpus(GenCorpusArgs),
    /// Analyze a WAV file and save its magnitude spectrogram
    ExportSpec(ExportSpecArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Gla,
    Fgla,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Algorithm {
        match a {
            AlgoArg::Gla => Algorithm::Gla,
            AlgoArg::Fgla => Algorithm::Fgla,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    /// Zero phase: start from the magnitudes themselves
    Zero,
    /// Uniform random phases from the seeded generator
    Random,
}

/// Framing flags shared by every subcommand that builds an analysis config.
#[derive(Args)]
struct StftArgs {
    /// Sample rate in Hz; inputs that carry a rate must agree with it
    #[arg(long)]
    sample_rate: Option<u32>,
    /// Frame shift in milliseconds (ignored when --hop is given)
    #[arg(long)]
    hop_ms: Option<f64>,
    /// Frame shift in samples
    #[arg(long)]
    hop: Option<usize>,
    /// Window length in samples (default: four hops)
    #[arg(long)]
    window: Option<usize>,
    /// FFT length, a power of two at or above the window length
    #[arg(long)]
    fft_length: Option<usize>,
}

impl StftArgs {
    fn config_at(&self, sample_rate: u32) -> Result<StftConfig, CliError> {
        let hop = match self.hop {
            Some(h) => h,
            None => {
                let ms = self.hop_ms.unwrap_or(12.5);
                if !ms.is_finite() || ms <= 0.0 {
                    return Err(CliError::Invalid(format!(
                        "hop of {ms} ms does not give a positive sample count"
                    )));
                }
                (sample_rate as f64 * ms / 1000.0).round() as usize
            }
        };
        let window = self.window.unwrap_or(4 * hop);
        let fft = self.fft_length.unwrap_or(window.next_power_of_two());
        let cfg = StftConfig {
            window_kind: WindowKind::Hann,
            window_length: window,
            hop_length: hop,
            fft_length: fft,
            padding: PaddingMode::ZeroEdge,
            sample_rate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects flags that contradict a config loaded from a file header.
    fn check_against(&self, cfg: &StftConfig) -> Result<(), CliError> {
        let mismatch = |name: &str, flag: String, file: String| {
            Err(CliError::Invalid(format!(
                "--{name} {flag} does not match the input's {name} of {file}"
            )))
        };
        if let Some(r) = self.sample_rate {
            if r != cfg.sample_rate {
                return mismatch("sample-rate", r.to_string(), cfg.sample_rate.to_string());
            }
        }
        if let Some(h) = self.hop {
            if h != cfg.hop_length {
                return mismatch("hop", h.to_string(), cfg.hop_length.to_string());
            }
        }
        if let Some(w) = self.window {
            if w != cfg.window_length {
                return mismatch("window", w.to_string(), cfg.window_length.to_string());
            }
        }
        if let Some(f) = self.fft_length {
            if f != cfg.fft_length {
                return mismatch("fft-length", f.to_string(), cfg.fft_length.to_string());
            }
        }
        Ok(())
    }
}

#[derive(Args)]
struct ReconstructArgs {
    /// Input: a .wav file, or a .json spectrogram header with its .bin sidecar
    input: PathBuf,
    /// Output WAV path
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgoArg::Fgla)]
    algo: AlgoArg,
    /// Iteration count (default: 30 for fgla, 60 for gla)
    #[arg(long)]
    iterations: Option<usize>,
    /// Momentum coefficient, must lie in [0, 1)
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = InitArg::Zero)]
    init: InitArg,
    /// Seed for --init random; the PHASEFAST_SEED env var overrides this
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop early once the residual drops below this value
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write a per-iteration residual trace CSV to this path
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    stft: StftArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory containing the WAV clip corpus
    #[arg(long)]
    corpus: PathBuf,
    /// Report output path
    #[arg(long, default_value = "bench_report.json")]
    out: PathBuf,
    /// Timed repetitions per clip and algorithm (after one warm-up run)
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 60)]
    gla_iterations: usize,
    #[arg(long, default_value_t = 30)]
    fgla_iterations: usize,
    /// Momentum coefficient for the fgla runs
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[command(flatten)]
    stft: StftArgs,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Input WAV file whose spectrogram is reconstructed
    input: PathBuf,
    /// Directory the trace and overlay CSV files are written into
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Comma-separated list of algo:iterations variants
    #[arg(long, default_value = "gla:20,gla:30,gla:60,fgla:20,fgla:30,fgla:60")]
    algos: String,
    /// Momentum coefficient for the fgla variants
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// FFT length for the overlay spectra, a power of two
    #[arg(long, default_value_t = 65536)]
    overlay_length: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Zero)]
    init: InitArg,
    /// Seed for --init random; the PHASEFAST_SEED env var overrides this
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    stft: StftArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    stft: StftArgs,
}

#[derive(Args)]
struct GenCorpusArgs {
    /// Directory the clips are written into
    #[arg(long, default_value = "corpus")]
    out_dir: PathBuf,
    /// Sample rate of the generated clips
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    sample_rate: u32,
}

#[derive(Args)]
struct ExportSpecArgs {
    /// Input WAV file
    input: PathBuf,
    /// Output header path; the magnitude payload lands next to it as .bin
    output: PathBuf,
    #[command(flatten)]
    stft: StftArgs,
}

#[derive(Debug)]
enum CliError {
    /// Exit code 1: the filesystem or an input file failed us.
    Io(String),
    /// Exit code 2: parameters, configuration, or validation rejected the run.
    Invalid(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Invalid(m) => m,
        }
    }
}

impl From<WavError> for CliError {
    fn from(e: WavError) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<StftError> for CliError {
    fn from(e: StftError) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

impl From<ReconstructError> for CliError {
    fn from(e: ReconstructError) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

impl From<SpecFileError> for CliError {
    fn from(e: SpecFileError) -> CliError {
        match e {
            SpecFileError::Stft(inner) => CliError::Invalid(inner.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> CliError {
        CliError::Invalid(e.to_string())
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// The PHASEFAST_SEED environment variable overrides any --seed flag.
fn resolve_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Invalid(format!(
                "{SEED_ENV} must be an unsigned 64-bit integer, got {v:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(std::env::VarError::NotUnicode(_)) => Err(CliError::Invalid(format!(
            "{SEED_ENV} is not valid unicode"
        ))),
    }
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha.is_finite() && (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "alpha of {alpha} lies outside the valid range [0, 1)"
        )))
    }
}

fn init_strategy(init: InitArg, seed: u64) -> InitStrategy {
    match init {
        InitArg::Zero => InitStrategy::ZeroPhase,
        InitArg::Random => InitStrategy::RandomPhase { seed },
    }
}

fn load_wav_signal(path: &Path) -> Result<Signal, CliError> {
    let wav = read_wav(&read_bytes(path)?)?;
    Signal::new(wav.samples, wav.sample_rate).map_err(CliError::from)
}

/// Loads the reconstruction target: either a WAV to analyze or an exported
/// spectrogram. Returns the magnitudes and the waveform length to synthesize.
fn load_target(
    input: &Path,
    stft: &StftArgs,
) -> Result<(MagnitudeSpectrogram, usize), CliError> {
    let is_spec = input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_spec {
        let s = read_spectrogram(input)?;
        stft.check_against(s.config())?;
        let len = s.config().canonical_len(s.frames());
        Ok((s, len))
    } else {
        let x = load_wav_signal(input)?;
        if let Some(r) = stft.sample_rate {
            if r != x.sample_rate() {
                return Err(CliError::Invalid(format!(
                    "--sample-rate {r} does not match the input's sample rate of {}",
                    x.sample_rate()
                )));
            }
        }
        let cfg = stft.config_at(x.sample_rate())?;
        let len = x.len();
        Ok((magnitude(&analyze(&x, &cfg)?), len))
    }
}

fn write_trace_csv(path: &Path, result: &ReconstructionResult) -> Result<(), CliError> {
    let mut out = String::from("iteration,residual,elapsed_ms\n");
    for (i, (r, t)) in result
        .residual_trace
        .iter()
        .zip(&result.iter_times_ms)
        .enumerate()
    {
        let _ = writeln!(out, "{},{},{}", i + 1, r, t);
    }
    write_bytes(path, out.as_bytes())
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<(), CliError> {
    check_alpha(args.alpha)?;
    let seed = resolve_seed(args.seed)?;
    let algo = Algorithm::from(args.algo);
    let (s, target_len) = load_target(&args.input, &args.stft)?;
    let params = ReconstructionParams {
        iterations: args
            .iterations
            .unwrap_or(match algo {
                Algorithm::Gla => 60,
                Algorithm::Fgla => 30,
            }),
        alpha: args.alpha,
        init: init_strategy(args.init, seed),
        tolerance: args.tolerance,
    };
    let result = reconstruct_to_len(&s, algo, &params, target_len, |_| Ok(()))?;

    let (bytes, clipped) = write_wav(&WavFile {
        sample_rate: s.config().sample_rate,
        samples: result.waveform.samples().to_vec(),
    });
    write_bytes(&args.output, &bytes)?;
    if let Some(trace) = &args.trace {
        write_trace_csv(trace, &result)?;
    }

    let final_residual = result.residual_trace.last().copied().unwrap_or(0.0);
    println!(
        "{}: {} iterations of {} in {:.1} ms, final residual {:.6}",
        args.output.display(),
        result.residual_trace.len(),
        algo.name(),
        result.total_time_ms,
        final_residual,
    );
    if clipped > 0 {
        println!("note: {clipped} samples clipped to the 16-bit range");
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    check_alpha(args.alpha)?;
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.corpus)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.corpus.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
        })
        .collect();
    paths.sort();

    let mut clips = Vec::with_capacity(paths.len());
    for path in &paths {
        let signal = load_wav_signal(path)?;
        if let Some(r) = args.stft.sample_rate {
            if r != signal.sample_rate() {
                return Err(CliError::Invalid(format!(
                    "--sample-rate {r} does not match {}'s sample rate of {}",
                    path.display(),
                    signal.sample_rate()
                )));
            }
        }
        let config = args.stft.config_at(signal.sample_rate())?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        clips.push(BenchClip {
            name,
            signal,
            config,
        });
    }

    let opts = BenchOptions {
        gla_iterations: args.gla_iterations,
        fgla_iterations: args.fgla_iterations,
        alpha: args.alpha,
        repeats: args.repeats,
        init: InitStrategy::ZeroPhase,
    };
    let report = run_bench(&clips, &opts)?;

    let json = serde_json::to_vec_pretty(&report)
        .map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
    write_bytes(&args.out, &json)?;

    for r in &report.clips {
        println!(
            "{:<12} {:<5} {:>3} iters  mean {:>9.2} ms  sc {:.4}  snr {:>7.2} dB",
            r.clip_id, r.algo, r.iterations, r.timing.mean_ms, r.final_spectral_convergence,
            r.snr_db
        );
    }
    println!(
        "mean delay reduction: {:.2}% ({} clips, report at {})",
        report.aggregate.mean_delay_reduction_pct,
        clips.len(),
        args.out.display()
    );
    Ok(())
}

fn parse_variant(token: &str) -> Result<(Algorithm, usize), CliError> {
    let bad = || {
        CliError::Invalid(format!(
            "bad variant {token:?}: expected algo:iterations, like gla:60 or fgla:30"
        ))
    };
    let (algo, iters) = token.split_once(':').ok_or_else(bad)?;
    let algo: Algorithm = algo.trim().parse().map_err(|_| bad())?;
    let iters: usize = iters.trim().parse().map_err(|_| bad())?;
    if iters == 0 {
        return Err(bad());
    }
    Ok((algo, iters))
}

fn cmd_convergence(args: ConvergenceArgs) -> Result<(), CliError> {
    check_alpha(args.alpha)?;
    let seed = resolve_seed(args.seed)?;
    let variants: Vec<(String, Algorithm, usize)> = args
        .algos
        .split(',')
        .map(|t| parse_variant(t).map(|(a, n)| (t.trim().to_string(), a, n)))
        .collect::<Result<_, _>>()?;
    if variants.is_empty() {
        return Err(CliError::Invalid("no variants given".into()));
    }

    let x = load_wav_signal(&args.input)?;
    if let Some(r) = args.stft.sample_rate {
        if r != x.sample_rate() {
            return Err(CliError::Invalid(format!(
                "--sample-rate {r} does not match the input's sample rate of {}",
                x.sample_rate()
            )));
        }
    }
    let cfg = args.stft.config_at(x.sample_rate())?;
    let s = magnitude(&analyze(&x, &cfg)?);
    create_dir(&args.out_dir)?;

    let mut traces = Vec::with_capacity(variants.len());
    for (label, algo, iterations) in &variants {
        let params = ReconstructionParams {
            iterations: *iterations,
            alpha: args.alpha,
            init: init_strategy(args.init, seed),
            tolerance: None,
        };
        let result = reconstruct_to_len(&s, *algo, &params, x.len(), |_| Ok(()))?;
        let overlay = fft_overlay(&result.waveform, args.overlay_length)?;
        let trace = ConvergenceTrace {
            algo: *algo,
            iterations: *iterations,
            alpha: result.params.alpha,
            residuals: result.residual_trace.clone(),
            fft_overlay: overlay,
        };
        let path = args
            .out_dir
            .join(format!("trace_{}_{}.csv", algo.name(), iterations));
        write_trace_csv(&path, &result)?;
        println!(
            "{label}: final residual {:.6}, trace at {}",
            trace.residuals.last().copied().unwrap_or(0.0),
            path.display()
        );
        traces.push((label.clone(), trace));
    }

    let overlay_path = args.out_dir.join("overlay.csv");
    let mut out = String::from("bin");
    for (label, _) in &traces {
        let _ = write!(out, ",{label}");
    }
    out.push('\n');
    let rows = traces[0].1.fft_overlay.len();
    for bin in 0..rows {
        let _ = write!(out, "{bin}");
        for (_, t) in &traces {
            let _ = write!(out, ",{}", t.fft_overlay[bin]);
        }
        out.push('\n');
    }
    write_bytes(&overlay_path, out.as_bytes())?;
    println!("overlay table at {}", overlay_path.display());

    for i in 0..traces.len() {
        for j in (i + 1)..traces.len() {
            let d = overlay_distance(&traces[i].1.fft_overlay, &traces[j].1.fft_overlay)?;
            println!(
                "overlay distance {} vs {}: {:.6}",
                traces[i].0, traces[j].0, d
            );
        }
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let rate = args.stft.sample_rate.unwrap_or(DEFAULT_SAMPLE_RATE);
    let cfg = args.stft.config_at(rate)?;
    let report = validate_cola(&cfg)?;
    println!("sample rate: {rate} Hz");
    println!("hop: {} samples = {} ms", cfg.hop_length, cfg.hop_ms());
    println!(
        "window: {} samples = {} ms (hann)",
        cfg.window_length,
        cfg.window_ms()
    );
    println!("fft length: {} -> {} bins", cfg.fft_length, cfg.bins());
    println!("frames for 1 s of audio: {}", cfg.frame_count(rate as usize));
    println!(
        "overlap-add envelope: min {:.6}, max {:.6}, deviation {:.3e}",
        report.min_envelope, report.max_envelope, report.deviation
    );
    if report.is_ok() {
        println!("overlap-add: OK");
        Ok(())
    } else {
        Err(CliError::Invalid(report.to_string()))
    }
}

fn cmd_gen_corpus(args: GenCorpusArgs) -> Result<(), CliError> {
    create_dir(&args.out_dir)?;
    for (name, signal) in corpus::default_corpus(args.sample_rate) {
        let (bytes, clipped) = write_wav(&WavFile {
            sample_rate: signal.sample_rate(),
            samples: signal.samples().to_vec(),
        });
        assert_eq!(clipped, 0, "corpus clips stay inside the 16-bit range");
        let path = args.out_dir.join(format!("{name}.wav"));
        write_bytes(&path, &bytes)?;
        println!(
            "{}: {:.1} s at {} Hz",
            path.display(),
            signal.len() as f64 / signal.sample_rate() as f64,
            signal.sample_rate()
        );
    }
    Ok(())
}

fn cmd_export_spec(args: ExportSpecArgs) -> Result<(), CliError> {
    let x = load_wav_signal(&args.input)?;
    if let Some(r) = args.stft.sample_rate {
        if r != x.sample_rate() {
            return Err(CliError::Invalid(format!(
                "--sample-rate {r} does not match the input's sample rate of {}",
                x.sample_rate()
            )));
        }
    }
    let cfg = args.stft.config_at(x.sample_rate())?;
    let s = magnitude(&analyze(&x, &cfg)?);
    write_spectrogram(&args.output, &s)?;
    println!(
        "{}: {} bins x {} frames",
        args.output.display(),
        s.bins(),
        s.frames()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Convergence(args) => cmd_convergence(args),
        Command::Validate(args) => cmd_validate(args),
        Command::GenCorpus(args) => cmd_gen_corpus(args),
        Command::ExportSpec(args) => cmd_export_spec(args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
