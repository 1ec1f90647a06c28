//! Detection and ranging metrics, empirical CDFs and report files.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::WaveformRecord;
use crate::error::{Error, Result};
use crate::pipeline::{generate_sri, ConditionClassifier, ConditionalRangeEstimator};
use crate::sri::residual_error;

/// Metrics over a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Fraction of records whose MLE condition matches the label.
    pub detection_accuracy: f64,
    pub mae: f64,
    pub rmse: f64,
    /// Error of the raw measurement `|d̄ − d|`.
    pub unmitigated_mae: f64,
    pub unmitigated_rmse: f64,
    /// Wall-clock milliseconds per record for both networks and mixture assembly.
    pub inference_time_per_sample_ms: Option<f64>,
    pub n_samples: usize,
    /// `|d̂ − d|` per record, in test-set order.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    JsonLike,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Self::Table),
            "json-like" | "json" => Ok(Self::JsonLike),
            other => Err(Error::Argument(format!("unknown report format {other:?}, expected table or json-like"))),
        }
    }
}

pub fn mean_absolute(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64
}

pub fn root_mean_square(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

impl EvalReport {
    /// Builds a report from per-record outcomes.
    pub fn from_outcomes(
        residuals: Vec<f64>,
        raw_errors: &[f64],
        correct: usize,
        inference_time_per_sample_ms: Option<f64>,
    ) -> Result<Self> {
        if residuals.is_empty() {
            return Err(Error::Argument("cannot build a report from zero records".into()));
        }
        if raw_errors.len() != residuals.len() {
            return Err(Error::dim("raw error count", residuals.len(), raw_errors.len()));
        }
        let n = residuals.len();
        Ok(Self {
            detection_accuracy: correct as f64 / n as f64,
            mae: mean_absolute(&residuals),
            rmse: root_mean_square(&residuals),
            unmitigated_mae: mean_absolute(raw_errors),
            unmitigated_rmse: root_mean_square(raw_errors),
            inference_time_per_sample_ms,
            n_samples: n,
            residuals,
        })
    }

    /// Copy with the timing removed, for byte-reproducible files.
    pub fn without_timing(&self) -> Self {
        Self { inference_time_per_sample_ms: None, ..self.clone() }
    }
}

/// Runs SRI generation on every test record and collects the metrics.
pub fn evaluate<C, E>(test: &[WaveformRecord], identifier: &C, estimator: &E) -> Result<EvalReport>
where
    C: ConditionClassifier + ?Sized,
    E: ConditionalRangeEstimator + ?Sized,
{
    if test.is_empty() {
        return Err(Error::Argument("test set is empty".into()));
    }
    let start = Instant::now();
    let mut sris = Vec::with_capacity(test.len());
    for r in test {
        sris.push(generate_sri(&r.cir, r.measured_distance, identifier, estimator)?);
    }
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut correct = 0;
    let mut residuals = Vec::with_capacity(test.len());
    let mut raw = Vec::with_capacity(test.len());
    for (sri, r) in sris.iter().zip(test) {
        if sri.mle_condition() == r.condition {
            correct += 1;
        }
        residuals.push(residual_error(sri.mmse_distance(), r.true_distance));
        raw.push(r.ranging_error());
    }
    EvalReport::from_outcomes(residuals, &raw, correct, Some(elapsed_ms / test.len() as f64))
}

/// Empirical CDF as `(error, fraction ≤ error)` pairs.
///
/// One point per distinct value, thinned to at most `n_points` evenly spaced
/// quantiles; the largest value is always kept.
pub fn cdf_points(residuals: &[f64], n_points: usize) -> Result<Vec<(f64, f64)>> {
    if residuals.is_empty() {
        return Err(Error::Argument("no residuals to build a CDF from".into()));
    }
    if n_points == 0 {
        return Err(Error::Argument("CDF needs at least one point".into()));
    }
    if let Some(bad) = residuals.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite residual {bad}")));
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match distinct.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => distinct.push((v, frac)),
        }
    }
    if distinct.len() <= n_points {
        return Ok(distinct);
    }
    let m = distinct.len();
    Ok((1..=n_points).map(|k| distinct[k * m / n_points - 1]).collect())
}

/// Writes the CDF as a two-column CSV with a header.
pub fn export_cdf(residuals: &[f64], path: &Path, n_points: usize) -> Result<()> {
    let mut text = String::from("residual_m,cumulative_fraction\n");
    for (v, f) in cdf_points(residuals, n_points)? {
        let _ = writeln!(text, "{v},{f}");
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
struct Flat {
    detection_accuracy: f64,
    mae_m: f64,
    rmse_m: f64,
    unmitigated_mae_m: f64,
    unmitigated_rmse_m: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    inference_time_per_sample_ms: Option<f64>,
    n_samples: usize,
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::JsonLike => {
            let flat = Flat {
                detection_accuracy: report.detection_accuracy,
                mae_m: report.mae,
                rmse_m: report.rmse,
                unmitigated_mae_m: report.unmitigated_mae,
                unmitigated_rmse_m: report.unmitigated_rmse,
                inference_time_per_sample_ms: report.inference_time_per_sample_ms,
                n_samples: report.n_samples,
            };
            let mut s = serde_json::to_string_pretty(&flat).expect("flat report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "{:<30}value", "metric");
            let _ = writeln!(s, "{:<30}{:.3}", "detection_accuracy", report.detection_accuracy);
            let _ = writeln!(s, "{:<30}{:.2}", "mae_m", report.mae);
            let _ = writeln!(s, "{:<30}{:.2}", "rmse_m", report.rmse);
            let _ = writeln!(s, "{:<30}{:.2}", "unmitigated_mae_m", report.unmitigated_mae);
            let _ = writeln!(s, "{:<30}{:.2}", "unmitigated_rmse_m", report.unmitigated_rmse);
            if let Some(t) = report.inference_time_per_sample_ms {
                let _ = writeln!(s, "{:<30}{:.3}", "inference_time_per_sample_ms", t);
            }
            let _ = writeln!(s, "{:<30}{}", "n_samples", report.n_samples);
            s
        }
    }
}

/// Parses a json-like report back; residuals are not part of the file.
pub fn parse_json_report(text: &str) -> Result<EvalReport> {
    let f: Flat = serde_json::from_str(text).map_err(|e| Error::Schema(format!("report: {e}")))?;
    Ok(EvalReport {
        detection_accuracy: f.detection_accuracy,
        mae: f.mae_m,
        rmse: f.rmse_m,
        unmitigated_mae: f.unmitigated_mae_m,
        unmitigated_rmse: f.unmitigated_rmse_m,
        inference_time_per_sample_ms: f.inference_time_per_sample_ms,
        n_samples: f.n_samples,
        residuals: Vec::new(),
    })
}

pub fn export_report(report: &EvalReport, path: &Path, format: ReportFormat) -> Result<()> {
    std::fs::write(path, render_report(report, format)).map_err(|e| Error::io(path, e))
}
