use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tsaudit_core::ingest::{detect_format, load_series, LoadedSeries, SeriesFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FormatArg {
    Auto,
    Ucr,
    Csv,
    Sidecar,
}

impl FormatArg {
    pub fn resolve(self, path: &Path) -> SeriesFormat {
        match self {
            FormatArg::Auto => detect_format(path),
            FormatArg::Ucr => SeriesFormat::UcrSingleColumn,
            FormatArg::Csv => SeriesFormat::CsvValueLabel,
            FormatArg::Sidecar => SeriesFormat::RegionsSidecar,
        }
    }
}

fn is_series_file(path: &Path) -> bool {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
    if name.starts_with('.') || name.ends_with(".regions.json") {
        return false;
    }
    !matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("json" | "tsv" | "svg" | "md")
    )
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .with_context(|| format!("cannot read directory {}", dir.display()))?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, out)?;
        } else if is_series_file(&p) {
            out.push(p);
        }
    }
    Ok(())
}

/// Expands directories recursively. Files named explicitly are kept as
/// given; the result is sorted and deduplicated.
pub fn collect_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            walk(p, &mut out)?;
        } else {
            out.push(p.clone());
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn load(path: &Path, format: FormatArg) -> Result<LoadedSeries> {
    Ok(load_series(path, format.resolve(path))?)
}
