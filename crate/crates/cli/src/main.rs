//! fatigue-seq: generate synthetic behavioral streams, encode them into
//! windowed sequence datasets, train and evaluate the LSTM recognizer,
//! score live streams, and compare GAP against FC output heads.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use fatigue_cli::bench::{run_gap_fc_bench, GapFcBenchConfig};
use fatigue_cli::checkpoint::{read_checkpoint, write_checkpoint};
use fatigue_cli::dataset::{read_dataset, write_dataset, DatasetHeader};
use fatigue_cli::report::RunReport;
use fatigue_cli::stream::{read_stream, write_stream};
use fatigue_cli::CliError;
use fatigue_core::lstm::{
    evaluate_with_threshold, stream_infer, train, TrainConfig, DECISION_THRESHOLD,
};
use fatigue_core::scenario::{generate_timeline, render_frames, ScenarioConfig};
use fatigue_core::window::{slide_dataset, FeatureWindow, SequenceSample, DEFAULT_STRIDE};
use fatigue_core::Label;

/// Parallelism cap; commands stay single-threaded unless this is set above 1.
const THREADS_ENV: &str = "FATIGUE_SEQ_THREADS";

#[derive(Parser)]
#[command(
    name = "fatigue-seq",
    about = "Spatio-temporal driver-fatigue recognition pipeline",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled landmark stream (JSONL).
    Generate(GenerateArgs),
    /// Encode one or more streams into a windowed sequence dataset (CSV).
    Encode(EncodeArgs),
    /// Train the LSTM recognizer on a dataset and evaluate the held-out split.
    TrainEval(TrainEvalArgs),
    /// Score a stream frame-by-frame with a trained checkpoint.
    StreamInfer(StreamInferArgs),
    /// Compare parameter counts, FLOPs, and forward time of FC vs GAP heads.
    BenchGapFc(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Stream length in seconds.
    #[arg(long, default_value_t = 600.0)]
    duration: f64,
    /// Frames per second.
    #[arg(long, default_value_t = 30)]
    fps: u32,
    /// Target fraction of fatigue-labeled time.
    #[arg(long, default_value_t = 0.33)]
    prior: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output stream path (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    /// Window length N in frames.
    #[arg(short = 'N', long = "window", default_value_t = 60)]
    window: usize,
    /// Skip interval k (keep every (k+1)-th frame).
    #[arg(short = 'k', long = "skip", default_value_t = 0)]
    skip: usize,
    /// Window slide in frames.
    #[arg(long, default_value_t = DEFAULT_STRIDE)]
    stride: usize,
    /// Frame rate recorded in the dataset header.
    #[arg(long, default_value_t = 30)]
    fps: u32,
    /// Output dataset path (CSV).
    #[arg(long)]
    out: PathBuf,
    /// Input stream files (JSONL), encoded independently and concatenated.
    #[arg(required = true)]
    streams: Vec<PathBuf>,
}

#[derive(Args)]
struct TrainEvalArgs {
    /// Input dataset (CSV).
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    /// LSTM hidden width.
    #[arg(long, default_value_t = 32)]
    hidden: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    /// Global gradient-norm clip.
    #[arg(long, default_value_t = 5.0)]
    clip: f64,
    /// Fraction of samples used for training; the rest is held out.
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    /// Multiply the learning rate by --lr-decay-factor every this many
    /// epochs (0 disables decay).
    #[arg(long, default_value_t = 0)]
    lr_decay_every: usize,
    #[arg(long, default_value_t = 1.0)]
    lr_decay_factor: f64,
    /// Disable inverse-frequency class weighting.
    #[arg(long)]
    no_class_weights: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Decision threshold for evaluation.
    #[arg(long, default_value_t = DECISION_THRESHOLD)]
    threshold: f64,
    /// Where to write the trained checkpoint.
    #[arg(long)]
    checkpoint_out: PathBuf,
    /// Where to write the run report (CSV).
    #[arg(long)]
    report_out: PathBuf,
}

#[derive(Args)]
struct StreamInferArgs {
    /// Trained checkpoint path.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Window length N in frames.
    #[arg(short = 'N', long = "window", default_value_t = 60)]
    window: usize,
    /// Skip interval k.
    #[arg(short = 'k', long = "skip", default_value_t = 0)]
    skip: usize,
    /// Decision threshold for the predicted label column.
    #[arg(long, default_value_t = DECISION_THRESHOLD)]
    threshold: f64,
    /// Output CSV of per-frame probabilities.
    #[arg(long)]
    out: PathBuf,
    /// Input stream (JSONL).
    stream: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 3)]
    height: usize,
    #[arg(long, default_value_t = 3)]
    width: usize,
    #[arg(long, default_value_t = 32)]
    channels: usize,
    /// Output units of the head under comparison.
    #[arg(long, default_value_t = 128)]
    units: usize,
    /// Timed forward iterations per head.
    #[arg(long, default_value_t = 10_000)]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the report (CSV); also printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version are successful exits; everything else is usage
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn thread_cap() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(raw) => raw
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| {
                CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))
            }),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Encode(args) => cmd_encode(args),
        Command::TrainEval(args) => cmd_train_eval(args),
        Command::StreamInfer(args) => cmd_stream_infer(args),
        Command::BenchGapFc(args) => cmd_bench_gap_fc(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    if args.fps == 0 {
        return Err(CliError::Usage("--fps must be at least 1".into()));
    }
    if !(args.duration.is_finite() && args.duration > 0.0) {
        return Err(CliError::Usage("--duration must be positive".into()));
    }
    if !(0.0..1.0).contains(&args.prior) {
        return Err(CliError::Usage("--prior must lie in [0, 1)".into()));
    }
    let config = ScenarioConfig {
        duration_s: args.duration,
        fps: args.fps,
        fatigue_prior: args.prior,
        seed: args.seed,
        ..ScenarioConfig::default()
    };
    let timeline = generate_timeline(&config)?;
    let frames = render_frames(&timeline, &config)?;
    write_stream(&args.out, &frames)?;
    let fatigue = timeline.labels.iter().filter(|l| l.is_fatigue()).count();
    println!(
        "wrote {} frames to {} ({} fatigue-labeled, {} events)",
        frames.len(),
        args.out.display(),
        fatigue,
        timeline.events.len()
    );
    Ok(())
}

fn encode_one(
    path: &std::path::Path,
    window: usize,
    skip: usize,
    stride: usize,
) -> Result<Vec<SequenceSample>, CliError> {
    let records = read_stream(path)?;
    let mut features = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for record in &records {
        features.push(record.feature_vector()?);
        labels.push(record.label()?.ok_or_else(|| {
            CliError::Data(format!(
                "{}: stream records need labels to build a dataset",
                path.display()
            ))
        })?);
    }
    Ok(slide_dataset(&features, &labels, window, skip, stride)?)
}

fn cmd_encode(args: EncodeArgs) -> Result<(), CliError> {
    if args.window == 0 || args.stride == 0 {
        return Err(CliError::Usage("--window and --stride must be positive".into()));
    }
    let threads = thread_cap()?.min(args.streams.len().max(1));
    let mut per_file: Vec<Vec<SequenceSample>> = Vec::with_capacity(args.streams.len());
    if threads <= 1 {
        for path in &args.streams {
            per_file.push(encode_one(path, args.window, args.skip, args.stride)?);
        }
    } else {
        // files fan out across a bounded pool; results keep input order
        std::thread::scope(|scope| -> Result<(), CliError> {
            for chunk in args.streams.chunks(threads) {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|path| {
                        scope.spawn(move || encode_one(path, args.window, args.skip, args.stride))
                    })
                    .collect();
                for handle in handles {
                    per_file.push(handle.join().expect("encode worker panicked")?);
                }
            }
            Ok(())
        })?;
    }

    let samples: Vec<SequenceSample> = per_file.into_iter().flatten().collect();
    if samples.is_empty() {
        eprintln!(
            "warning: no windows produced (streams shorter than {} frames?)",
            args.window
        );
    }
    let header = DatasetHeader {
        n: args.window,
        k: args.skip,
        stride: args.stride,
        fps: args.fps,
    };
    write_dataset(&args.out, &header, &samples)?;
    let fatigue = samples.iter().filter(|s| s.label.is_fatigue()).count();
    println!(
        "wrote {} samples ({} fatigue, {} normal, {} columns) to {}",
        samples.len(),
        fatigue,
        samples.len() - fatigue,
        header.cols(),
        args.out.display()
    );
    Ok(())
}

fn cmd_train_eval(args: TrainEvalArgs) -> Result<(), CliError> {
    let (header, samples) = read_dataset(&args.dataset)?;
    let config = TrainConfig {
        hidden_size: args.hidden,
        learning_rate: args.lr,
        momentum: args.momentum,
        batch_size: args.batch,
        epochs: args.epochs,
        seed: args.seed,
        clip_norm: args.clip,
        train_fraction: args.split,
        class_weighting: !args.no_class_weights,
        lr_decay_every: args.lr_decay_every,
        lr_decay_factor: args.lr_decay_factor,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let started = Instant::now();
    let output = train(&samples, &config)?;
    let train_ms = started.elapsed().as_secs_f64() * 1e3;

    let holdout: Vec<SequenceSample> = output
        .holdout_indices
        .iter()
        .map(|&i| samples[i].clone())
        .collect();
    let eval = evaluate_with_threshold(&output.model, &holdout, args.threshold)?;

    write_checkpoint(&args.checkpoint_out, &output.model)?;

    let fatigue = samples.iter().filter(|s| s.label.is_fatigue()).count();
    let mut report = RunReport::new();
    report.push("command", "train_eval");
    report.push("dataset", args.dataset.display());
    report.push("window", header.n);
    report.push("skip", header.k);
    report.push("stride", header.stride);
    report.push("fps", header.fps);
    report.push("columns", header.cols());
    report.push("samples", samples.len());
    report.push("fatigue_samples", fatigue);
    report.push("normal_samples", samples.len() - fatigue);
    report.push("hidden", config.hidden_size);
    report.push("epochs", config.epochs);
    report.push("learning_rate", config.learning_rate);
    report.push("momentum", config.momentum);
    report.push("batch_size", config.batch_size);
    report.push("clip_norm", config.clip_norm);
    report.push("train_fraction", config.train_fraction);
    report.push("class_weighting", config.class_weighting);
    report.push("lr_decay_every", config.lr_decay_every);
    report.push("lr_decay_factor", config.lr_decay_factor);
    report.push("seed", config.seed);
    report.push("threshold", args.threshold);
    report.push("train_samples", output.train_indices.len());
    report.push("holdout_samples", holdout.len());
    report.push("accuracy", eval.accuracy);
    report.push("mean_loss", eval.mean_loss);
    report.push("fatigue_correct", eval.fatigue_correct);
    report.push("fatigue_total", eval.fatigue_total);
    report.push("normal_correct", eval.normal_correct);
    report.push("normal_total", eval.normal_total);
    for (i, loss) in output.epoch_losses.iter().enumerate() {
        report.push(format!("loss_epoch_{i}"), loss);
    }
    report.push("train_time_ms", train_ms);
    report.write(&args.report_out)?;

    println!(
        "accuracy {:.4} on {} held-out samples; checkpoint {}, report {}",
        eval.accuracy,
        holdout.len(),
        args.checkpoint_out.display(),
        args.report_out.display()
    );
    Ok(())
}

fn cmd_stream_infer(args: StreamInferArgs) -> Result<(), CliError> {
    if args.window == 0 {
        return Err(CliError::Usage("--window must be positive".into()));
    }
    let model = read_checkpoint(&args.checkpoint)?;
    let records = read_stream(&args.stream)?;
    let mut window = FeatureWindow::new(args.window)?;
    let mut out = String::from("frame,t,probability,predicted\n");
    let mut emitted = 0usize;
    for (i, record) in records.iter().enumerate() {
        window.push(record.feature_vector()?);
        if let Some(p) = stream_infer(&model, &window, args.skip)? {
            let predicted = Label::from_u8(u8::from(p >= args.threshold)).expect("0/1");
            out.push_str(&format!("{i},{},{p},{}\n", record.t, predicted.as_u8()));
            emitted += 1;
        }
    }
    std::fs::write(&args.out, out)?;
    println!(
        "scored {} of {} frames ({} warm-up) into {}",
        emitted,
        records.len(),
        records.len() - emitted,
        args.out.display()
    );
    Ok(())
}

fn cmd_bench_gap_fc(args: BenchArgs) -> Result<(), CliError> {
    let config = GapFcBenchConfig {
        height: args.height,
        width: args.width,
        channels: args.channels,
        units: args.units,
        iterations: args.iters,
        seed: args.seed,
    };
    let report = run_gap_fc_bench(&config)?;
    print!("{}", report.to_csv());
    if let Some(path) = &args.out {
        report.write(path)?;
    }
    Ok(())
}
