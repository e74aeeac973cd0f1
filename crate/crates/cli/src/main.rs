//! Batch front end for the auditory spatial attention pipeline.
//!
//! Commands: preprocess, synth, train, inflate, eval, gradcheck. Every run
//! resolves its configuration as CLI flag > config file > built-in default
//! and records the resolved values in a JSON manifest beside its outputs.

mod cmd;
mod errors;
mod manifest;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "asad",
    about = "EEG auditory spatial attention decoding: preprocessing, synthetic data, training, evaluation",
    version
)]
struct Cli {
    /// Worker thread cap for batch-parallel tensor ops.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resample to 128 Hz, band-pass filter, and normalize recordings.
    Preprocess(PreprocessArgs),
    /// Generate synthetic lateralized EEG recordings.
    Synth(SynthArgs),
    /// Train a model with 5-fold cross-validation and emit a CSV report.
    Train(TrainArgs),
    /// Bootstrap a 3D checkpoint from a trained 2D checkpoint.
    Inflate(InflateArgs),
    /// Evaluate a checkpoint, or check 2D/3D inflation equivalence.
    Eval(EvalArgs),
    /// Run the finite-difference gradient suite; nonzero exit on failure.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
pub struct PreprocessArgs {
    /// Input container (.eeg) or fixture (.csv) file, or a directory of them.
    #[arg(long)]
    input: PathBuf,
    /// Output file (single input) or directory.
    #[arg(long)]
    output: PathBuf,
    /// Band-pass lower edge in Hz (default 14).
    #[arg(long)]
    band_low: Option<f64>,
    /// Band-pass upper edge in Hz (default 31).
    #[arg(long)]
    band_high: Option<f64>,
    /// Butterworth order, even (default 8).
    #[arg(long)]
    order: Option<usize>,
    /// Normalization scope: global | channel (default global).
    #[arg(long)]
    norm_scope: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Output directory for the generated .eeg files.
    #[arg(long)]
    output: PathBuf,
    /// TOML spec file; flags below override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    subjects: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Trial length in seconds.
    #[arg(long)]
    trial_len: Option<u32>,
    #[arg(long)]
    fs: Option<u32>,
    /// Left/right beta amplitude ratio (1.0 = no signal).
    #[arg(long)]
    asymmetry: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Topology table for channel names and hemisphere layout.
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Skip the band-power oracle self-test.
    #[arg(long)]
    no_self_test: bool,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Directory of preprocessed .eeg files (default: $ASAD_DATA_DIR).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory for checkpoints, logs and the report.
    #[arg(long)]
    output: PathBuf,
    /// cnn-baseline | cnn3d | densenet2d | densenet3d
    #[arg(long)]
    model: String,
    /// Decision window in seconds: 1 | 2 | 5 | 10.
    #[arg(long)]
    duration: Option<u32>,
    /// dependent | independent
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    topology: Option<PathBuf>,
    /// CV rounds to run (repeatable); all five when omitted.
    #[arg(long)]
    fold: Vec<usize>,
    /// Keep windows of one trial inside one fold.
    #[arg(long)]
    group_by_trial: bool,
    /// Train densenet3d from scratch instead of bootstrapping from 2D.
    #[arg(long)]
    no_bootstrap: bool,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    /// Time slices sampled per window per epoch (2D training).
    #[arg(long)]
    slices_per_window: Option<usize>,
    /// Densely connected growth rate k.
    #[arg(long)]
    growth_rate: Option<usize>,
    /// Transition compression factor.
    #[arg(long)]
    compression: Option<f64>,
}

#[derive(Args)]
pub struct InflateArgs {
    /// Trained densenet2d checkpoint.
    #[arg(long)]
    input: PathBuf,
    /// Path for the densenet3d checkpoint.
    #[arg(long)]
    output: PathBuf,
    /// Decision window in seconds (t_len = 128 * duration)...
    #[arg(long)]
    duration: Option<u32>,
    /// ...or an explicit temporal length in samples.
    #[arg(long)]
    t_len: Option<usize>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Checkpoint to evaluate.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Directory of preprocessed .eeg files (default: $ASAD_DATA_DIR).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Decision window in seconds; defaults to the checkpoint's t_len.
    #[arg(long)]
    duration: Option<u32>,
    /// Where to write the per-subject CSV report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Instead of evaluating data: inflate this 2D checkpoint and print the
    /// max logit deviation on temporally constant probes.
    #[arg(long)]
    check_inflation: bool,
    /// Temporal length for --check-inflation (default 128).
    #[arg(long)]
    t_len: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
}

#[derive(Args)]
pub struct GradcheckArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Growth rate of the reduced-width full-model check.
    #[arg(long)]
    growth_rate: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let file_cfg = match cmd::load_file_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category, e.message);
            std::process::exit(e.exit_code);
        }
    };
    let result = match cli.command {
        Command::Preprocess(args) => cmd::preprocess(args, &file_cfg),
        Command::Synth(args) => cmd::synth(args, &file_cfg),
        Command::Train(args) => cmd::train(args, &file_cfg),
        Command::Inflate(args) => cmd::inflate(args),
        Command::Eval(args) => cmd::eval(args, &file_cfg),
        Command::Gradcheck(args) => cmd::gradcheck(args),
    };
    if let Err(e) = result {
        eprintln!("error[{}]: {}", e.category, e.message);
        std::process::exit(e.exit_code);
    }
}
