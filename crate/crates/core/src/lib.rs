//! Auditing tools for time series anomaly benchmarks.

pub mod audit;
pub mod detectors;
pub mod diagnostics;
pub mod discord;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod model;
pub mod numfmt;
pub mod oneliner;
pub mod perturb;
pub mod plot;
pub mod report;
pub mod scoring;

pub use error::{
    DiagnosticsError, DiscordError, IngestError, ModelError, OneLinerError, PerturbError, ReportError, UcrNameError,
};
pub use model::{Alignment, LabelSet, Region, ScoreTrace, TimeSeries};
