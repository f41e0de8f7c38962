//! Series loaders for the three supported on-disk formats.
//!
//! Label regions are inclusive at both ends in every format:
//! * UCR file names give `begin` and `end` sample indices as written.
//! * CSV label columns mark each anomalous sample with `1`.
//! * Sidecar documents list `[start, end]` pairs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::IngestError;
use crate::model::{LabelSet, Region, TimeSeries};
use crate::scoring::{parse_ucr_name, UcrMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesFormat {
    /// One number per line; train_end and the anomaly come from the file name.
    UcrSingleColumn,
    /// `value[,label]` with optional leading timestamp column and header.
    CsvValueLabel,
    /// Numeric series plus `<file>.regions.json`.
    RegionsSidecar,
}

impl std::str::FromStr for SeriesFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ucr" | "ucr-single-column" => Ok(SeriesFormat::UcrSingleColumn),
            "csv" | "csv-value-label" => Ok(SeriesFormat::CsvValueLabel),
            "sidecar" | "regions-sidecar" => Ok(SeriesFormat::RegionsSidecar),
            other => Err(format!("unknown format '{other}' (expected ucr, csv or sidecar)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSeries {
    pub series: TimeSeries,
    pub labels: Option<LabelSet>,
    /// Kept for plot bundles only.
    pub timestamps: Option<Vec<String>>,
    pub ucr: Option<UcrMeta>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".regions.json");
    PathBuf::from(s)
}

/// Picks a format from the file name: UCR names first, then a sidecar next
/// to the file, otherwise CSV.
pub fn detect_format(path: &Path) -> SeriesFormat {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
    if name.contains("UCR_Anomaly_") {
        SeriesFormat::UcrSingleColumn
    } else if sidecar_path(path).is_file() {
        SeriesFormat::RegionsSidecar
    } else {
        SeriesFormat::CsvValueLabel
    }
}

fn series_id(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .unwrap_or_else(|| path.display().to_string())
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn model_err(path: &Path) -> impl Fn(crate::error::ModelError) -> IngestError + '_ {
    move |source| IngestError::Model {
        path: path.to_path_buf(),
        source,
    }
}

fn number(path: &Path, line: usize, token: &str) -> Result<f64, IngestError> {
    let v: f64 = token.parse().map_err(|_| IngestError::NotNumeric {
        path: path.to_path_buf(),
        line,
        token: token.to_string(),
    })?;
    if !v.is_finite() {
        return Err(IngestError::NonFinite {
            path: path.to_path_buf(),
            line,
            token: token.to_string(),
        });
    }
    Ok(v)
}

fn label(path: &Path, line: usize, token: &str) -> Result<bool, IngestError> {
    match token.parse::<f64>() {
        Ok(0.0) => Ok(false),
        Ok(1.0) => Ok(true),
        _ => Err(IngestError::BadLabel {
            path: path.to_path_buf(),
            line,
            token: token.to_string(),
        }),
    }
}

/// Whitespace-separated numbers, blank lines skipped.
fn parse_numeric_column(path: &Path, text: &str) -> Result<Vec<f64>, IngestError> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            values.push(number(path, i + 1, tok)?);
        }
    }
    if values.is_empty() {
        return Err(IngestError::Empty {
            path: path.to_path_buf(),
        });
    }
    Ok(values)
}

pub fn load_series(path: &Path, format: SeriesFormat) -> Result<LoadedSeries, IngestError> {
    match format {
        SeriesFormat::UcrSingleColumn => load_ucr(path),
        SeriesFormat::CsvValueLabel => load_csv(path),
        SeriesFormat::RegionsSidecar => load_sidecar(path),
    }
}

fn load_ucr(path: &Path) -> Result<LoadedSeries, IngestError> {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
    let meta = parse_ucr_name(name).map_err(|source| IngestError::UcrName {
        path: path.to_path_buf(),
        source,
    })?;
    let values = parse_numeric_column(path, &read(path)?)?;
    let n = values.len();
    let series = TimeSeries::new(series_id(path), values)
        .and_then(|t| t.with_train_end(meta.train_end))
        .map_err(model_err(path))?;
    let labels = LabelSet::new(vec![meta.region()], n).map_err(model_err(path))?;
    Ok(LoadedSeries {
        series,
        labels: Some(labels),
        timestamps: None,
        ucr: Some(meta),
    })
}

#[derive(Debug, Default)]
struct Columns {
    timestamp: Option<usize>,
    value: usize,
    label: Option<usize>,
    width: Option<usize>,
}

fn header_columns(fields: &[&str]) -> Option<Columns> {
    let find = |names: &[&str]| {
        fields
            .iter()
            .position(|f| names.contains(&f.trim().to_ascii_lowercase().as_str()))
    };
    let value = find(&["value", "values"])?;
    Some(Columns {
        timestamp: find(&["timestamp", "timestamps", "time", "date"]),
        value,
        label: find(&["is_anomaly", "anomaly", "label", "labels"]),
        width: Some(fields.len()),
    })
}

fn headerless_columns(path: &Path, line: usize, fields: &[&str]) -> Result<Columns, IngestError> {
    let numeric = |s: &str| s.trim().parse::<f64>().is_ok();
    let cols = match fields.len() {
        1 => Columns {
            value: 0,
            ..Default::default()
        },
        2 if numeric(fields[0]) => Columns {
            value: 0,
            label: Some(1),
            ..Default::default()
        },
        2 => Columns {
            timestamp: Some(0),
            value: 1,
            ..Default::default()
        },
        3 => Columns {
            timestamp: Some(0),
            value: 1,
            label: Some(2),
            ..Default::default()
        },
        k => {
            return Err(IngestError::Malformed {
                path: path.to_path_buf(),
                line,
                message: format!("expected 1 to 3 columns without a header, found {k}"),
            })
        }
    };
    Ok(Columns {
        width: Some(fields.len()),
        ..cols
    })
}

fn load_csv(path: &Path) -> Result<LoadedSeries, IngestError> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut cols: Option<Columns> = None;
    let mut values = Vec::new();
    let mut flags = Vec::new();
    let mut timestamps = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Malformed {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<&str> = record.iter().collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        let c = match &cols {
            Some(c) => c,
            None => {
                if let Some(h) = header_columns(&fields) {
                    cols = Some(h);
                    continue;
                }
                cols = Some(headerless_columns(path, line, &fields)?);
                cols.as_ref().expect("just set")
            }
        };
        if c.width.is_some_and(|w| w != fields.len()) {
            return Err(IngestError::Malformed {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} columns, found {}", c.width.unwrap_or(0), fields.len()),
            });
        }
        values.push(number(path, line, fields[c.value])?);
        if let Some(l) = c.label {
            flags.push(label(path, line, fields[l])?);
        }
        if let Some(t) = c.timestamp {
            timestamps.push(fields[t].to_string());
        }
    }
    if values.is_empty() {
        return Err(IngestError::Empty {
            path: path.to_path_buf(),
        });
    }
    let cols = cols.expect("values imply columns");
    let series = TimeSeries::new(series_id(path), values).map_err(model_err(path))?;
    Ok(LoadedSeries {
        series,
        labels: cols.label.map(|_| LabelSet::from_flags(&flags)),
        timestamps: cols.timestamp.map(|_| timestamps),
        ucr: None,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    regions: Vec<(usize, usize)>,
    #[serde(default)]
    train_end: Option<usize>,
}

fn load_sidecar(path: &Path) -> Result<LoadedSeries, IngestError> {
    let values = parse_numeric_column(path, &read(path)?)?;
    let side = sidecar_path(path);
    let sidecar: Sidecar = serde_json::from_str(&read(&side)?).map_err(|e| IngestError::Sidecar {
        path: side.clone(),
        message: e.to_string(),
    })?;
    let n = values.len();
    let mut series = TimeSeries::new(series_id(path), values).map_err(model_err(path))?;
    if let Some(t) = sidecar.train_end {
        series = series.with_train_end(t).map_err(model_err(&side))?;
    }
    let regions = sidecar
        .regions
        .iter()
        .map(|&(s, e)| Region::new(s, e))
        .collect::<Result<Vec<_>, _>>()
        .map_err(model_err(&side))?;
    let labels = LabelSet::new(regions, n).map_err(model_err(&side))?;
    Ok(LoadedSeries {
        series,
        labels: Some(labels),
        timestamps: None,
        ucr: None,
    })
}

/// Writes a series as one value per line plus its sidecar document.
pub fn write_sidecar_series(path: &Path, ts: &TimeSeries, labels: &LabelSet) -> std::io::Result<()> {
    let mut body = String::with_capacity(ts.len() * 12);
    for v in ts.values() {
        body.push_str(&v.to_string());
        body.push('\n');
    }
    fs::write(path, body)?;
    let regions: Vec<[usize; 2]> = labels.regions().iter().map(|r| [r.start, r.end]).collect();
    let mut doc = serde_json::json!({ "regions": regions });
    if let Some(t) = ts.train_end() {
        doc["train_end"] = t.into();
    }
    let mut text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(sidecar_path(path), text)
}
