//! Single-anomaly location scoring.
//!
//! Each test series holds exactly one anomaly; a detector returns one index
//! and is judged correct when that index lands within `slop` samples of the
//! labeled interval. Accuracy over a corpus is the fraction of correct series.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::UcrNameError;
use crate::model::{Region, TimeSeries};

const UCR_PREFIX: &str = "UCR_Anomaly_";

/// Metadata carried in a UCR archive file name,
/// `UCR_Anomaly_<name>_<train_end>_<begin>_<end>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UcrMeta {
    pub dataset_name: String,
    pub train_end: usize,
    pub begin: usize,
    pub end: usize,
}

impl UcrMeta {
    pub fn region(&self) -> Region {
        Region {
            start: self.begin,
            end: self.end,
        }
    }

    /// The canonical file name (without extension).
    pub fn file_name(&self) -> String {
        format!(
            "{UCR_PREFIX}{}_{}_{}_{}",
            self.dataset_name, self.train_end, self.begin, self.end
        )
    }
}

/// Parses a UCR archive file name. Directory components and a file
/// extension are ignored, as is anything before `UCR_Anomaly_`.
pub fn parse_ucr_name(filename: &str) -> Result<UcrMeta, UcrNameError> {
    let base = Path::new(filename)
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or(filename);
    let stem = match base.rsplit_once('.') {
        Some((stem, ext)) if !ext.is_empty() && ext.chars().all(|c| c.is_ascii_alphanumeric()) => stem,
        _ => base,
    };
    let body = match stem.find(UCR_PREFIX) {
        Some(pos) => &stem[pos + UCR_PREFIX.len()..],
        None => stem,
    };
    let missing = || UcrNameError::MissingTokens(filename.to_string());
    let mut parts = body.rsplitn(4, '_');
    let mut number = || -> Result<usize, UcrNameError> {
        let tok = parts.next().ok_or_else(missing)?;
        if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
            return Err(missing());
        }
        tok.parse().map_err(|_| missing())
    };
    let end = number()?;
    let begin = number()?;
    let train_end = number()?;
    let dataset_name = parts.next().unwrap_or("").to_string();
    if dataset_name.is_empty() {
        return Err(UcrNameError::MissingName(filename.to_string()));
    }
    if begin > end {
        return Err(UcrNameError::BeginAfterEnd {
            name: filename.to_string(),
            begin,
            end,
        });
    }
    if train_end == 0 || train_end >= begin {
        return Err(UcrNameError::TrainNotBeforeBegin {
            name: filename.to_string(),
            train_end,
            begin,
        });
    }
    Ok(UcrMeta {
        dataset_name,
        train_end,
        begin,
        end,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub slop: usize,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self { slop: 100 }
    }
}

/// True when `pred` lies in `[start - slop, end + slop]` (clamped at 0).
pub fn score_region(pred: usize, region: Region, slop: usize) -> bool {
    region.start.saturating_sub(slop) <= pred && pred <= region.end.saturating_add(slop)
}

pub fn score_location(pred: usize, meta: &UcrMeta, cfg: &ScoringConfig) -> bool {
    score_region(pred, meta.region(), cfg.slop)
}

/// Something that points at the single most anomalous sample.
///
/// A locator sees the training prefix and the full series but never the
/// labels.
pub trait Locator: Sync {
    fn locate(&self, train: &[f64], series: &TimeSeries) -> Result<usize, String>;
}

impl<F> Locator for F
where
    F: Fn(&[f64], &TimeSeries) -> Result<usize, String> + Sync,
{
    fn locate(&self, train: &[f64], series: &TimeSeries) -> Result<usize, String> {
        self(train, series)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub series_id: String,
    pub prediction: Option<usize>,
    pub correct: bool,
    /// Correct under a slop equal to the anomaly length instead of the fixed one.
    pub correct_length_slop: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub slop: usize,
    pub verdicts: Vec<SeriesVerdict>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    pub accuracy_length_slop: f64,
}

impl AccuracyReport {
    pub fn from_verdicts(slop: usize, verdicts: Vec<SeriesVerdict>) -> Self {
        let total = verdicts.len();
        let correct = verdicts.iter().filter(|v| v.correct).count();
        let correct_len = verdicts.iter().filter(|v| v.correct_length_slop).count();
        let frac = |c: usize| if total == 0 { 0.0 } else { c as f64 / total as f64 };
        Self {
            slop,
            verdicts,
            correct,
            total,
            accuracy: frac(correct),
            accuracy_length_slop: frac(correct_len),
        }
    }
}

/// Judges one prediction (or failure) against its metadata.
pub fn verdict(
    series_id: &str,
    prediction: Result<usize, String>,
    meta: &UcrMeta,
    cfg: &ScoringConfig,
) -> SeriesVerdict {
    match prediction {
        Ok(p) => SeriesVerdict {
            series_id: series_id.to_string(),
            prediction: Some(p),
            correct: score_location(p, meta, cfg),
            correct_length_slop: score_region(p, meta.region(), meta.region().len()),
            error: None,
        },
        Err(e) => SeriesVerdict {
            series_id: series_id.to_string(),
            prediction: None,
            correct: false,
            correct_length_slop: false,
            error: Some(e),
        },
    }
}

/// Runs a locator over a labeled corpus. Failures count as incorrect.
pub fn evaluate_detector(
    corpus: &[(TimeSeries, UcrMeta)],
    detector: &dyn Locator,
    cfg: &ScoringConfig,
) -> AccuracyReport {
    let verdicts = corpus
        .par_iter()
        .map(|(ts, meta)| {
            let train = &ts.values()[..ts.train_end().unwrap_or(meta.train_end).min(ts.len())];
            let pred = detector.locate(train, ts).and_then(|p| {
                if p < ts.len() {
                    Ok(p)
                } else {
                    Err(format!("prediction {p} is outside the series (n = {})", ts.len()))
                }
            });
            verdict(ts.name(), pred, meta, cfg)
        })
        .collect();
    AccuracyReport::from_verdicts(cfg.slop, verdicts)
}
