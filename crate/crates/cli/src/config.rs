//! Config file and precedence resolution.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use softrange::data::{SchemaMap, SyntheticConfig, DEFAULT_TRAIN_FRACTION};
use softrange::pipeline::TrainingConfig;
use softrange::sri::NoiseModel;

use crate::args::{DataArgs, SynthArgs, TrainingArgs, OUTPUT_DIR_ENV};
use crate::error::{CliError, CliResult};

pub const DEFAULT_SYNTH_RECORDS: usize = 10_000;
pub const DEFAULT_CDF_POINTS: usize = 1000;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: SynthFile,
    #[serde(default)]
    pub training: TrainingFile,
    #[serde(default)]
    pub data: DataFile,
    #[serde(default)]
    pub eval: EvalFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFile {
    pub n: Option<usize>,
    pub sigma_los: Option<f64>,
    pub sigma_nlos: Option<f64>,
    pub bias: Option<f64>,
    pub nlos_fraction: Option<f64>,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub cir_length: Option<usize>,
    pub pulse_width: Option<f64>,
    pub snr: Option<f64>,
    pub first_path_offset: Option<f64>,
    pub samples_per_meter: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingFile {
    pub learning_rate: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub adam_epsilon: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub eps0: Option<f64>,
    pub seed: Option<u64>,
    pub early_stop_patience: Option<usize>,
    pub validation_fraction: Option<f64>,
    pub dropout_rate: Option<f64>,
    pub hidden_width: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFile {
    pub path: Option<PathBuf>,
    pub schema: Option<String>,
    pub cir_length: Option<usize>,
    pub train_fraction: Option<f64>,
    pub split_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalFile {
    pub split: Option<String>,
    pub format: Option<String>,
    pub cdf_points: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })
    }
}

/// Flag, then config file, then environment, then the current directory.
pub fn output_dir(flag: Option<&Path>, file: &FileConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| file.out_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn synthetic(args: &SynthArgs, file: &SynthFile) -> (SyntheticConfig, usize) {
    let d = SyntheticConfig::default();
    let config = SyntheticConfig {
        noise: NoiseModel {
            sigma_los: args.sigma_los.or(file.sigma_los).unwrap_or(d.noise.sigma_los),
            sigma_nlos: args.sigma_nlos.or(file.sigma_nlos).unwrap_or(d.noise.sigma_nlos),
            bias: args.bias.or(file.bias).unwrap_or(d.noise.bias),
        },
        nlos_fraction: args.nlos_fraction.or(file.nlos_fraction).unwrap_or(d.nlos_fraction),
        distance_range: (
            args.d_min.or(file.d_min).unwrap_or(d.distance_range.0),
            args.d_max.or(file.d_max).unwrap_or(d.distance_range.1),
        ),
        cir_length: args.cir_length.or(file.cir_length).unwrap_or(d.cir_length),
        pulse_width: args.pulse_width.or(file.pulse_width).unwrap_or(d.pulse_width),
        snr: args.snr.or(file.snr).unwrap_or(d.snr),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        first_path_offset: args.first_path_offset.or(file.first_path_offset).unwrap_or(d.first_path_offset),
        samples_per_meter: args.samples_per_meter.or(file.samples_per_meter).unwrap_or(d.samples_per_meter),
    };
    (config, args.n.or(file.n).unwrap_or(DEFAULT_SYNTH_RECORDS))
}

pub fn training(args: &TrainingArgs, file: &TrainingFile) -> TrainingConfig {
    let d = TrainingConfig::default();
    let patience = match args.early_stop_patience.or(file.early_stop_patience) {
        Some(0) => None,
        Some(p) => Some(p),
        None => d.early_stop_patience,
    };
    TrainingConfig {
        learning_rate: args.learning_rate.or(file.learning_rate).unwrap_or(d.learning_rate),
        beta1: args.beta1.or(file.beta1).unwrap_or(d.beta1),
        beta2: args.beta2.or(file.beta2).unwrap_or(d.beta2),
        adam_epsilon: args.adam_epsilon.or(file.adam_epsilon).unwrap_or(d.adam_epsilon),
        epochs: args.epochs.or(file.epochs).unwrap_or(d.epochs),
        batch_size: args.batch_size.or(file.batch_size).unwrap_or(d.batch_size),
        eps0: args.eps0.or(file.eps0).unwrap_or(d.eps0),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        early_stop_patience: patience,
        validation_fraction: args.validation_fraction.or(file.validation_fraction).unwrap_or(d.validation_fraction),
        dropout_rate: args.dropout_rate.or(file.dropout_rate).unwrap_or(d.dropout_rate),
        hidden_width: args.hidden_width.or(file.hidden_width).unwrap_or(d.hidden_width),
    }
}

/// Resolved dataset source.
#[derive(Debug, Clone)]
pub struct DataSource {
    pub path: PathBuf,
    pub preset: String,
    pub schema: SchemaMap,
    pub train_fraction: f64,
    pub split_seed: u64,
}

pub fn data_source(args: &DataArgs, file: &DataFile) -> CliResult<DataSource> {
    let path = args
        .data
        .clone()
        .or_else(|| file.path.clone())
        .ok_or_else(|| CliError::Usage("no dataset given; pass --data or set [data] path".into()))?;
    let preset = args
        .schema
        .clone()
        .or_else(|| file.schema.clone())
        .unwrap_or_else(|| "synthetic".into());
    let mut schema = SchemaMap::preset(&preset, args.cir_length.or(file.cir_length))?;
    if let Some(l) = args.cir_length.or(file.cir_length) {
        schema.cir_length = l;
    }
    if !path.is_file() {
        return Err(softrange::Error::io(
            &path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found"),
        )
        .into());
    }
    Ok(DataSource {
        path,
        preset,
        schema,
        train_fraction: args.train_fraction.or(file.train_fraction).unwrap_or(DEFAULT_TRAIN_FRACTION),
        split_seed: args.split_seed.or(file.split_seed).unwrap_or(0),
    })
}
