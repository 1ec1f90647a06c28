//! CSV ingestion and export.
//!
//! A file has a header row, `L` CIR columns sharing a name prefix followed by
//! their sample index (`CIR0`, `CIR1`, ... or `cir_0`, ...), a measured-distance
//! column, either a true-distance or a ranging-error column, and a 0/1 label.
//! When the file stores the ranging error `e = d̄ − d`, the true distance is
//! recovered as `d̄ − e`.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::record::WaveformRecord;
use crate::error::{Error, Result};
use crate::sri::Condition;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceColumns {
    MeasuredAndTrue { measured: String, truth: String },
    /// Error column holds `measured − true`.
    MeasuredAndError { measured: String, error: String },
}

/// Maps record fields onto file columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaMap {
    pub cir_prefix: String,
    pub distance: DistanceColumns,
    pub label: String,
    /// Extra columns copied verbatim into record metadata.
    pub metadata: Vec<String>,
    /// CIR length used by this layout.
    pub cir_length: usize,
}

impl SchemaMap {
    /// Layout written by [`write_csv`] and the synthetic generator.
    pub fn synthetic(cir_length: usize) -> Self {
        Self {
            cir_prefix: "cir_".into(),
            distance: DistanceColumns::MeasuredAndTrue {
                measured: "measured_distance".into(),
                truth: "true_distance".into(),
            },
            label: "condition".into(),
            metadata: Vec::new(),
            cir_length,
        }
    }

    /// Office-campaign dataset (DWM1000, |CIR| cropped to 152 samples).
    ///
    /// Adopted reading: `RANGE` is the measured distance, `ERROR` the ranging
    /// error, `NLOS` the label. Revalidate against the actual release.
    pub fn dataset1() -> Self {
        Self {
            cir_prefix: "CIR".into(),
            distance: DistanceColumns::MeasuredAndError {
                measured: "RANGE".into(),
                error: "ERROR".into(),
            },
            label: "NLOS".into(),
            metadata: Vec::new(),
            cir_length: 152,
        }
    }

    /// Multi-room dataset (EVB1000, 157-sample CIR, room and obstacle labels).
    ///
    /// Adopted reading: `range` is the measured distance and `error` the
    /// ranging error. Revalidate against the actual release.
    pub fn dataset2() -> Self {
        Self {
            cir_prefix: "cir_".into(),
            distance: DistanceColumns::MeasuredAndError {
                measured: "range".into(),
                error: "error".into(),
            },
            label: "nlos".into(),
            metadata: vec!["room".into(), "obstacle".into()],
            cir_length: 157,
        }
    }

    /// `synthetic`, `dataset1` or `dataset2`; `synthetic` needs the CIR length.
    pub fn preset(name: &str, cir_length: Option<usize>) -> Result<Self> {
        match name {
            "synthetic" => Ok(Self::synthetic(cir_length.unwrap_or(152))),
            "dataset1" => Ok(Self::dataset1()),
            "dataset2" => Ok(Self::dataset2()),
            other => Err(Error::Schema(format!(
                "unknown schema preset {other:?} (expected synthetic, dataset1 or dataset2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowRejection {
    /// 1-based data row (header excluded).
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub records: Vec<WaveformRecord>,
    pub rejected: Vec<RowRejection>,
}

struct Columns {
    cir: Vec<usize>,
    measured: usize,
    second: usize,
    second_is_error: bool,
    label: usize,
    metadata: Vec<(String, usize)>,
}

fn resolve_columns(headers: &csv::StringRecord, schema: &SchemaMap) -> Result<Columns> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("unknown column {name:?}")))
    };
    let mut cir: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(pos, h)| {
            let idx = h.trim().strip_prefix(schema.cir_prefix.as_str())?;
            idx.parse::<usize>().ok().map(|i| (i, pos))
        })
        .collect();
    if cir.is_empty() {
        return Err(Error::Schema(format!(
            "no CIR columns with prefix {:?}",
            schema.cir_prefix
        )));
    }
    cir.sort_unstable();
    let (measured, second, second_is_error) = match &schema.distance {
        DistanceColumns::MeasuredAndTrue { measured, truth } => (find(measured)?, find(truth)?, false),
        DistanceColumns::MeasuredAndError { measured, error } => (find(measured)?, find(error)?, true),
    };
    let metadata = schema
        .metadata
        .iter()
        .map(|m| find(m).map(|pos| (m.clone(), pos)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Columns {
        cir: cir.into_iter().map(|(_, pos)| pos).collect(),
        measured,
        second,
        second_is_error,
        label: find(&schema.label)?,
        metadata,
    })
}

fn parse_number(row: &csv::StringRecord, pos: usize, what: &str) -> std::result::Result<f64, String> {
    let field = row.get(pos).map(str::trim).unwrap_or("");
    if field.is_empty() {
        return Err(format!("missing {what}"));
    }
    let v: f64 = field
        .parse()
        .map_err(|_| format!("non-numeric {what}: {field:?}"))?;
    if !v.is_finite() {
        return Err(format!("non-finite {what}"));
    }
    Ok(v)
}

fn parse_row(row: &csv::StringRecord, cols: &Columns, cir_length: usize) -> std::result::Result<WaveformRecord, String> {
    let available = cols.cir.iter().take_while(|&&pos| row.get(pos).is_some_and(|f| !f.trim().is_empty())).count();
    if available < cir_length {
        return Err(format!("CIR shorter than {cir_length} (found {available} values)"));
    }
    let cir = cols.cir[..cir_length]
        .iter()
        .enumerate()
        .map(|(i, &pos)| parse_number(row, pos, &format!("CIR sample {i}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let measured = parse_number(row, cols.measured, "measured distance")?;
    let second = parse_number(row, cols.second, if cols.second_is_error { "ranging error" } else { "true distance" })?;
    let truth = if cols.second_is_error { measured - second } else { second };
    if truth <= 0.0 {
        return Err(format!("true distance must be positive, got {truth}"));
    }
    let label = parse_number(row, cols.label, "label")?;
    let condition = if label == 0.0 {
        Condition::Los
    } else if label == 1.0 {
        Condition::Nlos
    } else {
        return Err(format!("label must be 0 or 1, got {label}"));
    };
    let mut record = WaveformRecord::new(cir, measured, truth, condition);
    for (name, pos) in &cols.metadata {
        if let Some(v) = row.get(*pos) {
            record.metadata.insert(name.clone(), v.trim().to_string());
        }
    }
    Ok(record)
}

/// Reads every row into a [`WaveformRecord`]; malformed rows are skipped and reported.
pub fn load_csv(path: &Path, schema: &SchemaMap, cir_length: usize) -> Result<LoadedDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?
        .clone();
    if headers.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::Dataset(format!("{}: empty file", path.display())));
    }
    let cols = resolve_columns(&headers, schema)?;

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let outcome = row
            .map_err(|e| format!("unreadable row: {e}"))
            .and_then(|row| parse_row(&row, &cols, cir_length));
        match outcome {
            Ok(r) => records.push(r),
            Err(reason) => rejected.push(RowRejection { row: row_no, reason }),
        }
    }
    if records.is_empty() {
        let first = rejected
            .first()
            .map(|r| format!("; row {}: {}", r.row, r.reason))
            .unwrap_or_default();
        return Err(Error::Dataset(format!(
            "{}: no valid rows ({} rejected{first})",
            path.display(),
            rejected.len()
        )));
    }
    Ok(LoadedDataset { records, rejected })
}

/// Writes records in the [`SchemaMap::synthetic`] layout.
///
/// All records must share one CIR length. Output is byte-deterministic.
pub fn write_csv(path: &Path, records: &[WaveformRecord]) -> Result<()> {
    let cir_length = records.first().map_or(0, |r| r.cir.len());
    if let Some(bad) = records.iter().find(|r| r.cir.len() != cir_length) {
        return Err(Error::dim("CSV export CIR length", cir_length, bad.cir.len()));
    }
    let schema = SchemaMap::synthetic(cir_length);
    let DistanceColumns::MeasuredAndTrue { measured, truth } = &schema.distance else {
        unreachable!("synthetic layout stores true distance")
    };
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_io_err(path, e))?;
    let mut header: Vec<String> = (0..cir_length).map(|i| format!("{}{i}", schema.cir_prefix)).collect();
    header.extend([measured.clone(), truth.clone(), schema.label.clone()]);
    writer.write_record(&header).map_err(|e| csv_io_err(path, e))?;
    let mut row: Vec<String> = Vec::with_capacity(cir_length + 3);
    for r in records {
        row.clear();
        row.extend(r.cir.iter().map(|v| v.to_string()));
        row.push(r.measured_distance.to_string());
        row.push(r.true_distance.to_string());
        row.push(r.condition.index().to_string());
        writer.write_record(&row).map_err(|e| csv_io_err(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn csv_io_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}
