use std::path::PathBuf;

use thiserror::Error;

/// Violations of the basic data model invariants.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("time series must have at least 2 samples, got {len}")]
    TooShort { len: usize },
    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("train_end {train_end} must satisfy 0 < train_end < {len}")]
    BadTrainEnd { train_end: usize, len: usize },
    #[error("region start {start} is after end {end}")]
    InvertedRegion { start: usize, end: usize },
    #[error("region ({start}, {end}) exceeds series of length {len}")]
    RegionOutOfBounds { start: usize, end: usize, len: usize },
    #[error("score trace of length {scores} with subsequence length {sublen} is empty")]
    EmptyTrace { scores: usize, sublen: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OneLinerError {
    #[error("window length k={k} exceeds transformed series length {len}")]
    WindowTooLong { k: usize, len: usize },
    #[error("window length must be at least 1")]
    ZeroWindow,
    #[error("run length {run_len} is invalid for a series of length {len} (need 2 <= run_len <= len)")]
    BadRunLength { run_len: usize, len: usize },
    #[error("coefficient c must be finite and non-negative, got {0}")]
    BadCoefficient(f64),
    #[error("offset b must be finite, got {0}")]
    BadOffset(f64),
    #[error("label set is empty; nothing to solve")]
    EmptyLabels,
    #[error("label set covers {labels} samples but series has {series}")]
    LengthMismatch { labels: usize, series: usize },
    #[error("search grid is invalid: {0}")]
    BadGrid(String),
    #[error("corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("region ({start}, {end}) is shorter than 2 samples")]
    RegionTooShort { start: usize, end: usize },
    #[error("region ({start}, {end}) exceeds series of length {len}")]
    RegionOutOfBounds { start: usize, end: usize, len: usize },
    #[error("subsequence length {sublen} must be >= 4 and <= n/2 (n = {len})")]
    BadSublen { sublen: usize, len: usize },
    #[error("label set is empty")]
    EmptyLabels,
    #[error("corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscordError {
    #[error("subsequence length {sublen} must be >= 4")]
    SublenTooSmall { sublen: usize },
    #[error("series of length {len} is too short for subsequence length {sublen} (need n >= 2m)")]
    SeriesTooShort { len: usize, sublen: usize },
    #[error("exclusion zone must be at least 1")]
    ZeroExclusion,
    #[error("z-normalization epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbError {
    #[error("invalid perturbation parameter: {0}")]
    BadParameter(String),
    #[error("region ({start}, {end}) exceeds series of length {len}")]
    RegionOutOfBounds { start: usize, end: usize, len: usize },
    #[error("donor window ({donor}..{donor_end}) overlaps target window ({target}..{target_end})")]
    DonorOverlap {
        donor: usize,
        donor_end: usize,
        target: usize,
        target_end: usize,
    },
    #[error("period {period} is longer than n/4 (n = {len})")]
    PeriodTooLong { period: usize, len: usize },
    #[error("series of length {len} is too short for this injection")]
    SeriesTooShort { len: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Failure to parse a UCR archive file name.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UcrNameError {
    #[error("'{0}' does not end with three underscore-separated integers")]
    MissingTokens(String),
    #[error("'{0}' has no dataset name before the index tokens")]
    MissingName(String),
    #[error("'{name}': anomaly begin {begin} is after end {end}")]
    BeginAfterEnd { name: String, begin: usize, end: usize },
    #[error("'{name}': train_end {train_end} must be positive and before begin {begin}")]
    TrainNotBeforeBegin {
        name: String,
        train_end: usize,
        begin: usize,
    },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: file contains no samples")]
    Empty { path: PathBuf },
    #[error("{path}:{line}: cannot parse '{token}' as a number")]
    NotNumeric { path: PathBuf, line: usize, token: String },
    #[error("{path}:{line}: value '{token}' is not finite")]
    NonFinite { path: PathBuf, line: usize, token: String },
    #[error("{path}:{line}: label '{token}' is not 0 or 1")]
    BadLabel { path: PathBuf, line: usize, token: String },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Sidecar { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    UcrName {
        path: PathBuf,
        #[source]
        source: UcrNameError,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported report schema version '{found}' (expected '{expected}')")]
    SchemaVersion { found: String, expected: String },
    #[error(
        "report aggregate '{field}' is inconsistent with per-series records: stored {stored}, recomputed {recomputed}"
    )]
    Inconsistent {
        field: String,
        stored: String,
        recomputed: String,
    },
    #[error("trace name '{0}' is used more than once")]
    DuplicateTrace(String),
    #[error("trace '{name}' covers {covers} samples but the series has {len}")]
    TraceLength { name: String, covers: usize, len: usize },
}
