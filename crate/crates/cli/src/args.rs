use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const OUTPUT_DIR_ENV: &str = "SOFTRANGE_OUTPUT_DIR";

const AFTER_HELP: &str = "\
Settings are resolved as: command-line flag, then config file (--config), then built-in default.
The output directory falls back to $SOFTRANGE_OUTPUT_DIR, then the current directory.

Exit codes: 0 success, 2 bad arguments, 3 data/schema/checkpoint problem, 4 numeric failure, 5 I/O failure.";

/// Soft range information for UWB ranging: synthesize data, train, evaluate, infer.
#[derive(Debug, Parser)]
#[command(name = "softrange", version, after_help = AFTER_HELP)]
pub struct Cli {
    /// TOML config file with [synthetic], [training], [data] and [eval] tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for outputs (and, for eval/infer, the trained run).
    #[arg(long, short = 'o', global = true)]
    pub out_dir: Option<PathBuf>,
    /// Replace existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset CSV and its manifest.
    Synth(SynthArgs),
    /// Train both networks; writes two checkpoints and a run manifest.
    Train(TrainArgs),
    /// Evaluate trained networks; writes a report and a residual CDF.
    Eval(EvalArgs),
    /// Print the soft range information for one record.
    Infer(InferArgs),
}

#[derive(Debug, Args, Default)]
pub struct SynthArgs {
    /// Number of records.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma_los: Option<f64>,
    #[arg(long)]
    pub sigma_nlos: Option<f64>,
    /// NLOS ranging bias in meters.
    #[arg(long)]
    pub bias: Option<f64>,
    #[arg(long)]
    pub nlos_fraction: Option<f64>,
    #[arg(long)]
    pub d_min: Option<f64>,
    #[arg(long)]
    pub d_max: Option<f64>,
    #[arg(long)]
    pub cir_length: Option<usize>,
    #[arg(long)]
    pub pulse_width: Option<f64>,
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long)]
    pub first_path_offset: Option<f64>,
    #[arg(long)]
    pub samples_per_meter: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct DataArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Column layout: synthetic, dataset1 or dataset2.
    #[arg(long)]
    pub schema: Option<String>,
    /// CIR length; defaults to the preset's length.
    #[arg(long)]
    pub cir_length: Option<usize>,
    /// Share of records used for training; the rest is the test split.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct TrainingArgs {
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub adam_epsilon: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Target standard deviation of the estimator loss, in meters.
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Epochs without validation improvement before stopping; 0 disables early stopping.
    #[arg(long)]
    pub early_stop_patience: Option<usize>,
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    #[arg(long)]
    pub dropout_rate: Option<f64>,
    #[arg(long)]
    pub hidden_width: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
}

#[derive(Debug, Args, Default)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Directory holding the checkpoints and run manifest; defaults to the output directory.
    #[arg(long)]
    pub run_dir: Option<PathBuf>,
    /// Records to evaluate: the held-out `test` split of the training run, or `all`.
    #[arg(long)]
    pub split: Option<String>,
    /// Report layout: table or json-like.
    #[arg(long)]
    pub format: Option<String>,
    /// Maximum number of CDF points.
    #[arg(long)]
    pub cdf_points: Option<usize>,
    /// Include wall-clock inference time in the report file (makes it non-reproducible).
    #[arg(long)]
    pub with_timing: bool,
}

#[derive(Debug, Args, Default)]
pub struct InferArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub run_dir: Option<PathBuf>,
    /// 1-based data row of --data (header excluded).
    #[arg(long, conflicts_with = "cir")]
    pub row: Option<usize>,
    /// File with CIR samples separated by commas, whitespace or newlines.
    #[arg(long, requires = "measured")]
    pub cir: Option<PathBuf>,
    /// Measured distance in meters, used with --cir.
    #[arg(long)]
    pub measured: Option<f64>,
}
