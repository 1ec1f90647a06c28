use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use softrange::data::{
    canonicalize, generate_synthetic, load_csv, split, write_csv, LoadedDataset, Normalization, SyntheticConfig,
    WaveformRecord,
};
use softrange::eval::{evaluate, export_cdf, export_report, render_report, EvalReport, ReportFormat};
use softrange::pipeline::{
    dataset_fingerprint, generate_sri, train_estimator, train_identifier, EstimatorModel, IdentifierModel,
    RunManifest, MANIFEST_VERSION,
};

use crate::args::{EvalArgs, InferArgs, SynthArgs, TrainArgs};
use crate::config::{self, DataSource, FileConfig, DEFAULT_CDF_POINTS};
use crate::error::{CliError, CliResult};
use crate::sri_text;

pub const SYNTH_CSV: &str = "synthetic.csv";
pub const SYNTH_MANIFEST: &str = "synthetic_manifest.json";
pub const IDENTIFIER_CKPT: &str = "identifier.ckpt";
pub const ESTIMATOR_CKPT: &str = "estimator.ckpt";
pub const RUN_MANIFEST: &str = "run_manifest.json";
pub const CDF_CSV: &str = "cdf.csv";

/// Written next to a synthetic dataset so its noise model can be recovered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub version: u32,
    pub n: usize,
    pub config: SyntheticConfig,
    pub dataset_fingerprint: String,
}

pub struct Context {
    pub file: FileConfig,
    pub out_dir: PathBuf,
    pub force: bool,
}

impl Context {
    /// Fails before any work if an output exists and `--force` is absent.
    fn claim(&self, names: &[&str]) -> CliResult<Vec<PathBuf>> {
        let paths: Vec<PathBuf> = names.iter().map(|n| self.out_dir.join(n)).collect();
        if !self.force {
            if let Some(p) = paths.iter().find(|p| p.exists()) {
                return Err(CliError::Exists(p.clone()));
            }
        }
        std::fs::create_dir_all(&self.out_dir).map_err(|e| softrange::Error::io(&self.out_dir, e))?;
        Ok(paths)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| softrange::Error::io(path, e).into())
}

pub fn synth(ctx: &Context, args: &SynthArgs) -> CliResult<()> {
    let (config, n) = config::synthetic(args, &ctx.file.synthetic);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    config.validate()?;
    let paths = ctx.claim(&[SYNTH_CSV, SYNTH_MANIFEST])?;
    let records = generate_synthetic(&config, n)?;
    write_csv(&paths[0], &records)?;
    let manifest = SynthManifest {
        version: MANIFEST_VERSION,
        n,
        dataset_fingerprint: dataset_fingerprint(&records),
        config,
    };
    write_json(&paths[1], &manifest)?;
    println!("wrote {} records to {}", n, paths[0].display());
    Ok(())
}

fn load(source: &DataSource) -> CliResult<(LoadedDataset, Vec<WaveformRecord>)> {
    let loaded = load_csv(&source.path, &source.schema, source.schema.cir_length)?;
    for r in loaded.rejected.iter().take(5) {
        eprintln!("skipped {} row {}: {}", source.path.display(), r.row, r.reason);
    }
    if loaded.rejected.len() > 5 {
        eprintln!("skipped {} rows in total", loaded.rejected.len());
    }
    let canonical = loaded
        .records
        .iter()
        .map(|r| canonicalize(r, source.schema.cir_length, Normalization::MaxAbs))
        .collect();
    Ok((loaded, canonical))
}

pub fn train(ctx: &Context, args: &TrainArgs) -> CliResult<()> {
    let source = config::data_source(&args.data, &ctx.file.data)?;
    let training = config::training(&args.training, &ctx.file.training);
    training.validate()?;
    let paths = ctx.claim(&[IDENTIFIER_CKPT, ESTIMATOR_CKPT, RUN_MANIFEST])?;

    let (loaded, records) = load(&source)?;
    let data = split(&records, source.train_fraction, source.split_seed)?;
    let id = train_identifier(&data.train, &training)?;
    let est = train_estimator(&data.train, &training)?;
    id.model.checkpoint(&paths[0])?;
    est.model.checkpoint(&paths[1])?;
    let report = evaluate(&data.test, &id.model, &est.model)?;

    let manifest = RunManifest {
        version: MANIFEST_VERSION,
        config: training,
        dataset_fingerprint: dataset_fingerprint(&loaded.records),
        n_train: data.train.len(),
        n_test: data.test.len(),
        cir_length: source.schema.cir_length,
        identifier_history: id.history,
        estimator_history: est.history,
        identifier_training_accuracy: id.training_accuracy,
        extra: BTreeMap::from([
            ("data".to_string(), source.path.display().to_string()),
            ("schema".to_string(), source.preset.clone()),
            ("train_fraction".to_string(), source.train_fraction.to_string()),
            ("split_seed".to_string(), source.split_seed.to_string()),
        ]),
        metrics: metrics(&report),
    };
    manifest.save(&paths[2])?;
    println!(
        "trained on {} records, tested on {}: accuracy {:.4}, MAE {:.4} m, RMSE {:.4} m (unmitigated MAE {:.4} m)",
        data.train.len(),
        data.test.len(),
        report.detection_accuracy,
        report.mae,
        report.rmse,
        report.unmitigated_mae
    );
    Ok(())
}

fn metrics(r: &EvalReport) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("test_detection_accuracy".to_string(), r.detection_accuracy),
        ("test_mae_m".to_string(), r.mae),
        ("test_rmse_m".to_string(), r.rmse),
        ("test_unmitigated_mae_m".to_string(), r.unmitigated_mae),
        ("test_unmitigated_rmse_m".to_string(), r.unmitigated_rmse),
    ])
}

struct Models {
    identifier: IdentifierModel,
    estimator: EstimatorModel,
    manifest: Option<RunManifest>,
}

fn load_models(ctx: &Context, run_dir: Option<&Path>) -> CliResult<Models> {
    let dir = run_dir.map(Path::to_path_buf).unwrap_or_else(|| ctx.out_dir.clone());
    let identifier = IdentifierModel::restore(&dir.join(IDENTIFIER_CKPT))?;
    let estimator = EstimatorModel::restore(&dir.join(ESTIMATOR_CKPT))?;
    let manifest_path = dir.join(RUN_MANIFEST);
    let manifest = if manifest_path.exists() { Some(RunManifest::load(&manifest_path)?) } else { None };
    Ok(Models { identifier, estimator, manifest })
}

pub fn eval(ctx: &Context, args: &EvalArgs) -> CliResult<()> {
    let source = config::data_source(&args.data, &ctx.file.data)?;
    let format: ReportFormat = args
        .format
        .clone()
        .or_else(|| ctx.file.eval.format.clone())
        .unwrap_or_else(|| "table".into())
        .parse()?;
    let which = args
        .split
        .clone()
        .or_else(|| ctx.file.eval.split.clone())
        .unwrap_or_else(|| "test".into());
    if which != "test" && which != "all" {
        return Err(CliError::Usage(format!("--split must be test or all, got {which:?}")));
    }
    let cdf_points = args.cdf_points.or(ctx.file.eval.cdf_points).unwrap_or(DEFAULT_CDF_POINTS);
    let models = load_models(ctx, args.run_dir.as_deref())?;
    let report_name = match format {
        ReportFormat::Table => "report.txt",
        ReportFormat::JsonLike => "report.json",
    };
    let paths = ctx.claim(&[report_name, CDF_CSV])?;

    let (loaded, records) = load(&source)?;
    let test = if which == "all" {
        records
    } else {
        let manifest = models.manifest.as_ref().ok_or_else(|| {
            CliError::Usage("--split test needs the run manifest of the training run; use --split all".into())
        })?;
        if manifest.dataset_fingerprint != dataset_fingerprint(&loaded.records) {
            return Err(softrange::Error::Dataset(
                "dataset differs from the one the run was trained on; use --split all".into(),
            )
            .into());
        }
        let fraction: f64 = manifest.extra.get("train_fraction").and_then(|v| v.parse().ok()).unwrap_or(source.train_fraction);
        let seed: u64 = manifest.extra.get("split_seed").and_then(|v| v.parse().ok()).unwrap_or(source.split_seed);
        split(&records, fraction, seed)?.test
    };

    let report = evaluate(&test, &models.identifier, &models.estimator)?;
    let written = if args.with_timing { report.clone() } else { report.without_timing() };
    export_report(&written, &paths[0], format)?;
    export_cdf(&report.residuals, &paths[1], cdf_points)?;
    print!("{}", render_report(&report, ReportFormat::Table));
    Ok(())
}

fn read_cir_file(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| softrange::Error::io(path, e))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| softrange::Error::Dataset(format!("{}: non-numeric CIR value {t:?}", path.display())).into())
        })
        .collect()
}

pub fn infer(ctx: &Context, args: &InferArgs) -> CliResult<()> {
    let models = load_models(ctx, args.run_dir.as_deref())?;
    let (cir, measured) = match (&args.cir, args.row) {
        (Some(path), _) => {
            let measured = args.measured.ok_or_else(|| CliError::Usage("--cir needs --measured".into()))?;
            let raw = WaveformRecord::new(read_cir_file(path)?, measured, measured, softrange::sri::Condition::Los);
            if raw.cir.len() != models.identifier.cir_length() {
                return Err(softrange::Error::dim("CIR length", models.identifier.cir_length(), raw.cir.len()).into());
            }
            let r = canonicalize(&raw, raw.cir.len(), Normalization::MaxAbs);
            (r.cir, measured)
        }
        (None, Some(row)) => {
            let source = config::data_source(&args.data, &ctx.file.data)?;
            let (loaded, records) = load(&source)?;
            if row == 0 {
                return Err(CliError::Usage("--row is 1-based".into()));
            }
            if let Some(rej) = loaded.rejected.iter().find(|r| r.row == row) {
                return Err(softrange::Error::Dataset(format!("row {row} was rejected: {}", rej.reason)).into());
            }
            let skipped = loaded.rejected.iter().filter(|r| r.row < row).count();
            let r = records
                .get(row - 1 - skipped)
                .ok_or_else(|| CliError::Usage(format!("row {row} is past the end of the dataset")))?;
            (r.cir.clone(), r.measured_distance)
        }
        (None, None) => return Err(CliError::Usage("pass --row with --data, or --cir with --measured".into())),
    };
    let sri = generate_sri(&cir, measured, &models.identifier, &models.estimator)?;
    print!("{}", sri_text::render(&sri));
    Ok(())
}
