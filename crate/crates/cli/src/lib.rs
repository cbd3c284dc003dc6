//! anthrokit — command-line pipeline for estimating body measurements from
//! sparse 3D landmarks in any pose.
//!
//! Subcommands wire the library end to end: synthetic dataset generation,
//! pose-independent feature selection, regressor training, prediction,
//! evaluation, landmark-noise augmentation, the fit-and-repose baseline, and
//! the landmark/measurement ambiguity sweep. Every command echoes its
//! resolved parameters into a manifest; rerunning with `--config <manifest>`
//! reproduces the outputs byte for byte.

pub mod commands;
pub mod config;
pub mod predictions;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use anthrokit_core::error::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "anthrokit",
    version,
    about = "Pose-independent body measurements from sparse 3D landmarks",
    long_about = "Estimates 11 body measurements from 70 sparse 3D landmarks in any pose.\n\
        Pipeline: gen -> select -> train -> predict -> eval, plus noise \
        augmentation,\na fit-and-repose baseline and a shape-ambiguity sweep.\n\
        Defaults follow the reference configuration: feature threshold 10 mm, \n\
        noise bound 5.6 mm, network 368-194-97-11."
)]
pub struct Cli {
    /// Worker threads (default: available parallelism; env ANTHROKIT_THREADS
    /// as fallback). Results are identical at any thread count; --threads 1
    /// is the serial audit baseline.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// key=value config file; command-line flags override its values. A
    /// manifest written by a previous run reproduces that run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate synthetic posed-landmark datasets with ground-truth
    /// measurements (subject-level train/test split).
    Gen(GenArgs),
    /// Select pose-independent landmark-pair distance features (median
    /// deviation below the threshold; default 10 mm).
    Select(SelectArgs),
    /// Train the measurement regressor (368-194-97-11 by default).
    Train(TrainArgs),
    /// Predict measurements for every record of a dataset.
    Predict(PredictArgs),
    /// Evaluate predictions: per-measurement MAE + aMAE, or per-measurement
    /// deviation across a frame sequence.
    Eval(EvalArgs),
    /// Move each landmark along the mesh surface by up to a bound
    /// (default 5.6 mm) to emulate landmarking error.
    Noise(NoiseArgs),
    /// Fit-and-repose baseline: fit the body to posed landmarks, repose to
    /// the A-pose, measure geometrically.
    Baseline(BaselineArgs),
    /// Optimize the minimal-landmark-motion shape direction and sweep the
    /// measurement error against landmark displacement.
    Ambiguity(AmbiguityArgs),
    /// Export the synthetic body model file for a seed.
    Model(ModelArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Select(_) => "select",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Eval(_) => "eval",
            Command::Noise(_) => "noise",
            Command::Baseline(_) => "baseline",
            Command::Ambiguity(_) => "ambiguity",
            Command::Model(_) => "model",
        }
    }
}

/// Shared way to obtain the body model: a serialized file wins over a build
/// seed.
#[derive(Args, Debug, Default, Clone)]
pub struct ModelSource {
    /// Serialized body model file.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Seed for the built-in synthetic body (default 0).
    #[arg(long)]
    pub model_seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct GenArgs {
    /// Output directory for train.tsv, test.tsv, apose.tsv, params.tsv.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Number of subjects (default 50).
    #[arg(long)]
    pub subjects: Option<usize>,
    /// Poses per subject (default 40).
    #[arg(long)]
    pub poses_per_subject: Option<usize>,
    /// standing,sitting,varied fractions summing to 1. The reference
    /// proportions are 1/12,1/12,10/12.
    #[arg(long)]
    pub pose_mix: Option<String>,
    /// Fraction of subjects held out into test.tsv (default 0.2).
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Generation seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub model: ModelSource,
}

#[derive(Args, Debug, Default)]
pub struct SelectArgs {
    /// Posed samples of a single subject (dataset file).
    #[arg(long)]
    pub poses: Option<PathBuf>,
    /// A-pose reference records (dataset file).
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Keep only this subject's posed samples (default: the first record's
    /// subject; other subjects then make the command fail).
    #[arg(long)]
    pub subject: Option<String>,
    /// Subject id to pick from the reference file (default: subject of the
    /// posed samples).
    #[arg(long)]
    pub reference_subject: Option<String>,
    /// Median-deviation threshold in millimeters (reference value 10 mm).
    #[arg(long)]
    pub threshold_mm: Option<f64>,
    /// Keep at most this many pairs (smallest medians win).
    #[arg(long)]
    pub max_pairs: Option<usize>,
    /// Accept posed samples from multiple subjects (warns; the procedure is
    /// defined over a single subject's poses).
    #[arg(long)]
    pub allow_multi_subject: bool,
    /// Buffered deviation values before spilling to disk.
    #[arg(long)]
    pub memory_cap_values: Option<usize>,
    /// Output selection file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct TrainArgs {
    /// Labeled training dataset.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Feature selection file.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    /// Output model file (the training log goes to <out>.log.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Learning rate (default 1e-3).
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Batch size (default 256).
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Epochs (default 500).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Seed for initialization and shuffling (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// adam-like or sgd-momentum (default adam-like).
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Fraction of subjects held out for validation (default 0.1).
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    /// Early-stop patience in epochs, 0 disables (default 50).
    #[arg(long)]
    pub early_stop_patience: Option<usize>,
    /// Decoupled weight decay (default 1e-4).
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Gaussian jitter added to raw training landmarks, mm (default 2.0;
    /// emulates landmarking error for noise robustness).
    #[arg(long)]
    pub landmark_jitter_mm: Option<f64>,
    /// Hidden layer widths, comma separated (default 194,97).
    #[arg(long)]
    pub hidden_dims: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct PredictArgs {
    /// Dataset of records to predict.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Feature selection file (must match the model digest).
    #[arg(long)]
    pub selection: Option<PathBuf>,
    /// Trained model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output predictions CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct EvalArgs {
    /// Predictions CSV.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Ground-truth dataset (records carry per-subject measurements);
    /// required for --mode static.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// static: MAE/aMAE against ground truth; sequence: per-measurement
    /// deviation of each frame from the first.
    #[arg(long)]
    pub mode: Option<String>,
    /// Output report stem (writes <out>.csv and <out>.txt).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct NoiseArgs {
    /// Dataset to augment.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Per-record generation parameters (params.tsv from gen).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Maximum on-surface displacement in millimeters (reference value
    /// 5.6 mm).
    #[arg(long)]
    pub max_dist_mm: Option<f64>,
    /// Augmentation seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output dataset file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelSource,
}

#[derive(Args, Debug, Default)]
pub struct BaselineArgs {
    /// Dataset of posed records to measure.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Output predictions CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fit iterations (default 2000).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Fit learning rate (default 0.02).
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[command(flatten)]
    pub model: ModelSource,
}

#[derive(Args, Debug, Default)]
pub struct AmbiguityArgs {
    /// Output curve CSV (k, max landmark distance, per-measurement error).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reference shape coefficients, comma separated (default zeros).
    #[arg(long)]
    pub beta_ref: Option<String>,
    /// Largest step k (default 25; the landmark displacement axis then spans
    /// roughly 0-2.5 cm).
    #[arg(long)]
    pub k_max: Option<f64>,
    /// Number of k steps including 0 (default 51).
    #[arg(long)]
    pub k_steps: Option<usize>,
    /// Optimizer seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Multi-start restarts (default 5).
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Optimizer iterations (default 5000).
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[command(flatten)]
    pub model: ModelSource,
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// Build seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output body model file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Configures the global thread pool and dispatches the subcommand.
pub fn run(cli: Cli) -> Result<()> {
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("ANTHROKIT_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    if threads == 0 {
        return Err(Error::InvalidInput("--threads must be at least 1".into()));
    }
    // The pool can only be installed once per process; later calls (e.g. in
    // tests driving several commands) keep the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    let cfg = match &cli.config {
        Some(path) => {
            let kv = config::KvConfig::load(path)?;
            kv.check_command(cli.command.name())?;
            kv
        }
        None => config::KvConfig::new(),
    };

    match cli.command {
        Command::Gen(args) => commands::gen::run(args, &cfg),
        Command::Select(args) => commands::select::run(args, &cfg),
        Command::Train(args) => commands::train::run(args, &cfg),
        Command::Predict(args) => commands::predict::run(args, &cfg),
        Command::Eval(args) => commands::eval::run(args, &cfg),
        Command::Noise(args) => commands::noise::run(args, &cfg),
        Command::Baseline(args) => commands::baseline::run(args, &cfg),
        Command::Ambiguity(args) => commands::ambiguity::run(args, &cfg),
        Command::Model(args) => commands::model::run(args, &cfg),
    }
}

/// Maps an error to the documented exit codes: 2 for validation problems,
/// 3 for computation failures.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        2
    } else {
        3
    }
}
