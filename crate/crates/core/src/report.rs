//! The versioned audit report document.
//!
//! Reports are JSON with keys in sorted order and every float rounded to 9
//! significant digits, so identical runs produce identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::audit::{AuditConfig, CorpusAggregates, SeriesRecord};
use crate::error::ReportError;
use crate::numfmt::round9;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: String,
    pub config: AuditConfig,
    pub series: Vec<SeriesRecord>,
    pub aggregates: CorpusAggregates,
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round9(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Serializes to a key-sorted value tree with rounded floats.
pub fn canonical_value<T: Serialize>(x: &T) -> Result<Value, ReportError> {
    let mut v = serde_json::to_value(x)?;
    round_floats(&mut v);
    Ok(v)
}

fn canonical<T: Serialize + for<'de> Deserialize<'de>>(x: &T) -> Result<T, ReportError> {
    Ok(serde_json::from_value(canonical_value(x)?)?)
}

fn inconsistency(stored: &Value, recomputed: &Value, path: &str) -> Option<(String, String, String)> {
    match (stored, recomputed) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, va) in a {
                let sub = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                match b.get(k) {
                    Some(vb) => {
                        if let Some(d) = inconsistency(va, vb, &sub) {
                            return Some(d);
                        }
                    }
                    None => return Some((sub, va.to_string(), "absent".into())),
                }
            }
            b.keys()
                .find(|k| !a.contains_key(*k))
                .map(|k| (format!("{path}.{k}"), "absent".into(), b[k].to_string()))
        }
        (Value::Array(a), Value::Array(b)) if a.len() == b.len() => a
            .iter()
            .zip(b)
            .enumerate()
            .find_map(|(i, (x, y))| inconsistency(x, y, &format!("{path}[{i}]"))),
        _ if stored == recomputed => None,
        _ => Some((path.to_string(), stored.to_string(), recomputed.to_string())),
    }
}

impl AuditReport {
    /// Builds a report with freshly computed aggregates. Records are sorted
    /// by series id (stable, so equal ids keep input order).
    pub fn new(config: AuditConfig, mut series: Vec<SeriesRecord>) -> Result<Self, ReportError> {
        series.sort_by(|a, b| a.series_id.cmp(&b.series_id));
        let config = canonical(&config)?;
        let series = canonical(&series)?;
        let aggregates = CorpusAggregates::compute(&series, &config).map_err(|e| ReportError::Inconsistent {
            field: "series.labels".into(),
            stored: e.to_string(),
            recomputed: "valid label set".into(),
        })?;
        Ok(Self {
            schema_version: SCHEMA_VERSION.to_string(),
            config,
            series,
            aggregates: canonical(&aggregates)?,
        })
    }

    /// Checks that the stored aggregates match a recomputation from the
    /// per-series records.
    pub fn verify(&self) -> Result<(), ReportError> {
        let recomputed =
            CorpusAggregates::compute(&self.series, &self.config).map_err(|e| ReportError::Inconsistent {
                field: "series.labels".into(),
                stored: e.to_string(),
                recomputed: "valid label set".into(),
            })?;
        let stored = canonical_value(&self.aggregates)?;
        let recomputed = canonical_value(&recomputed)?;
        match inconsistency(&stored, &recomputed, "aggregates") {
            None => Ok(()),
            Some((field, stored, recomputed)) => Err(ReportError::Inconsistent {
                field,
                stored,
                recomputed,
            }),
        }
    }

    pub fn to_canonical_string(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(&canonical_value(self)?)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_str_verified(text: &str) -> Result<Self, ReportError> {
        let v: Value = serde_json::from_str(text)?;
        let found = v.get("schema_version").and_then(Value::as_str).unwrap_or("<missing>");
        if found != SCHEMA_VERSION {
            return Err(ReportError::SchemaVersion {
                found: found.to_string(),
                expected: SCHEMA_VERSION.to_string(),
            });
        }
        let report: AuditReport = serde_json::from_value(v)?;
        report.verify()?;
        Ok(report)
    }
}

pub fn write_report(report: &AuditReport, path: &Path) -> Result<(), ReportError> {
    report.verify()?;
    let text = report.to_canonical_string()?;
    fs::write(path, text).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_report(path: &Path) -> Result<AuditReport, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    AuditReport::from_str_verified(&text)
}
