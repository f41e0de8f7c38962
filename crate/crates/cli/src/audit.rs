use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::Args;
use rayon::prelude::*;
use tsaudit_core::audit::{audit_corpus, AuditConfig, AuditInput, SeriesRecord};
use tsaudit_core::diagnostics::FlagThresholds;
use tsaudit_core::discord::{discord_score, DiscordParams};
use tsaudit_core::ingest::LoadedSeries;
use tsaudit_core::numfmt::sig9;
use tsaudit_core::oneliner::{FamilyId, OffsetSearch, SearchGrid};
use tsaudit_core::plot::{render_svg, write_plot_bundle};
use tsaudit_core::report::{write_report, AuditReport};
use tsaudit_core::ScoreTrace;

use crate::input::{collect_files, load, FormatArg};
use crate::{runtime, usage, Outcome};

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Series files or directories (searched recursively).
    #[arg(required = true, value_name = "PATH")]
    pub inputs: Vec<PathBuf>,

    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,

    /// Point tolerances w to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub tolerance: Vec<usize>,

    /// One-liner families to search (default: all, simplest first).
    #[arg(long, value_delimiter = ',')]
    pub families: Vec<FamilyId>,

    /// Window lengths k to try.
    #[arg(long, value_delimiter = ',', default_value = "3,5,10,21,50,101")]
    pub k_candidates: Vec<usize>,

    /// movstd coefficients c to try.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,3,5,10")]
    pub c_candidates: Vec<f64>,

    /// Constant-run lengths to try.
    #[arg(long, value_delimiter = ',', default_value = "3,5,10,20")]
    pub run_len_candidates: Vec<usize>,

    /// Only try this many quantile-spaced offsets per (u, k, c) instead of all.
    #[arg(long, value_name = "N")]
    pub max_b_candidates: Option<usize>,

    /// Subsequence length for the discord and label-consistency passes.
    #[arg(long, default_value_t = 64)]
    pub sublen: usize,

    /// Consistency threshold as a fraction of the median nearest-neighbor distance.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,

    /// Discords recorded per series (0 skips the discord pass).
    #[arg(long, default_value_t = 3)]
    pub topk: usize,

    /// Slop for the last-point hit rate.
    #[arg(long, default_value_t = 100)]
    pub slop: usize,

    /// Fraction of the series a single region must cover to be HIGH_DENSITY.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub density_threshold: f64,

    /// Mean relative position above which the corpus shows run-to-failure bias.
    #[arg(long, default_value_t = 0.7)]
    pub bias_threshold: f64,

    /// Write the audit report here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Write a plot bundle (and SVG) per series into this directory.
    #[arg(long, value_name = "DIR")]
    pub plots: Option<PathBuf>,

    /// Exit with status 3 when any flaw is found.
    #[arg(long)]
    pub fail_on_flaw: bool,
}

fn config(a: &AuditArgs, seed: u64) -> Result<AuditConfig, anyhow::Error> {
    if a.tolerance.is_empty() {
        return Err(anyhow!("--tolerance needs at least one value"));
    }
    if !(a.alpha.is_finite() && a.alpha > 0.0) {
        return Err(anyhow!("--alpha must be positive"));
    }
    let grid = SearchGrid {
        k_candidates: a.k_candidates.clone(),
        c_candidates: a.c_candidates.clone(),
        run_len_candidates: a.run_len_candidates.clone(),
        max_b_candidates: a.max_b_candidates.unwrap_or(SearchGrid::default().max_b_candidates),
        offset_search: if a.max_b_candidates.is_some() {
            OffsetSearch::Sampled
        } else {
            OffsetSearch::Exhaustive
        },
    }
    .normalized()?;
    let mut tolerances = a.tolerance.clone();
    tolerances.sort_unstable();
    tolerances.dedup();
    let families = if a.families.is_empty() {
        FamilyId::SEARCH_ORDER.to_vec()
    } else {
        FamilyId::SEARCH_ORDER
            .iter()
            .copied()
            .filter(|f| a.families.contains(f))
            .collect()
    };
    Ok(AuditConfig {
        tolerances,
        families,
        grid,
        sublen: a.sublen,
        alpha: a.alpha,
        topk: a.topk,
        seed,
        slop: a.slop,
        thresholds: FlagThresholds {
            high_density_fraction: a.density_threshold,
            run_to_failure_mean: a.bias_threshold,
            ..FlagThresholds::default()
        },
    })
}

fn group_of(path: &std::path::Path) -> Option<String> {
    path.parent()
        .and_then(|p| p.file_name())
        .and_then(|s| s.to_str())
        .map(str::to_string)
}

pub fn run(a: AuditArgs, seed: u64) -> Outcome {
    let cfg = config(&a, seed).map_err(usage)?;
    let files = collect_files(&a.inputs).map_err(runtime)?;
    if files.is_empty() {
        return Err(runtime(anyhow!("no series files found")));
    }
    let loaded: Vec<(PathBuf, LoadedSeries)> = files
        .par_iter()
        .map(|p| load(p, a.format).map(|l| (p.clone(), l)))
        .collect::<Result<_, _>>()
        .map_err(runtime)?;
    let mut inputs: Vec<AuditInput> = Vec::with_capacity(loaded.len());
    for (path, l) in &loaded {
        match &l.labels {
            Some(labels) if !labels.is_empty() => {
                inputs.push((l.series.clone(), labels.clone(), group_of(path)));
            }
            _ => return Err(runtime(anyhow!("{}: series has no labeled anomaly", path.display()))),
        }
    }

    let records: Vec<SeriesRecord> = audit_corpus(&inputs, &cfg)
        .into_iter()
        .zip(&loaded)
        .map(|(r, (path, _))| r.with_context(|| path.display().to_string()))
        .collect::<Result<_, _>>()
        .map_err(runtime)?;
    let report = AuditReport::new(cfg.clone(), records).map_err(runtime)?;

    if let Some(out) = &a.out {
        write_report(&report, out).map_err(runtime)?;
    }
    if let Some(dir) = &a.plots {
        write_plots(dir, &loaded, &report, &cfg).map_err(runtime)?;
    }
    print_summary(&report);

    if a.fail_on_flaw && report.aggregates.any_flaw() {
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn write_plots(
    dir: &std::path::Path,
    loaded: &[(PathBuf, LoadedSeries)],
    report: &AuditReport,
    cfg: &AuditConfig,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut used = HashSet::new();
    let mut names = Vec::with_capacity(loaded.len());
    for (_, l) in loaded {
        let base = l.series.name().to_string();
        let mut name = base.clone();
        let mut k = 2;
        while !used.insert(name.clone()) {
            name = format!("{base}-{k}");
            k += 1;
        }
        names.push(name);
    }
    loaded
        .par_iter()
        .zip(names)
        .try_for_each(|((_, l), name)| -> anyhow::Result<()> {
            let mut traces: Vec<(String, ScoreTrace)> = Vec::new();
            if cfg.topk > 0 {
                if let Ok(t) = discord_score(&l.series, &DiscordParams::new(cfg.sublen)) {
                    traces.push(("discord".into(), t));
                }
            }
            let record = report.series.iter().find(|r| r.series_id == l.series.name());
            if let Some(spec) = record.and_then(|r| r.triviality.iter().find_map(|t| t.spec)) {
                let flags = tsaudit_core::oneliner::apply_oneliner(&spec, &l.series)?;
                let mut s = vec![0.0; l.series.len()];
                flags.into_iter().for_each(|f| s[f] = 1.0);
                traces.push(("oneliner".into(), ScoreTrace::pointwise(s)?));
            }
            let tsv = dir.join(format!("{name}.tsv"));
            write_plot_bundle(&l.series, l.labels.as_ref(), &traces, l.timestamps.as_deref(), &tsv)?;
            let svg = render_svg(&l.series, l.labels.as_ref(), &traces);
            fs::write(dir.join(format!("{name}.svg")), svg).with_context(|| format!("cannot write plot for {name}"))?;
            Ok(())
        })
}

fn print_summary(report: &AuditReport) {
    let agg = &report.aggregates;
    println!("series audited: {}", agg.series_count);
    println!();
    println!(
        "{:<24} {:>4} {:>8} {:>6} {:>9}",
        "group", "w", "solved", "total", "fraction"
    );
    for s in &agg.solved {
        println!(
            "{:<24} {:>4} {:>8} {:>6} {:>9.3}",
            "(all)", s.w, s.solved, s.total, s.fraction
        );
    }
    for (g, ga) in &agg.groups {
        for s in &ga.solved {
            println!(
                "{:<24} {:>4} {:>8} {:>6} {:>9.3}",
                g, s.w, s.solved, s.total, s.fraction
            );
        }
    }
    println!();
    println!("flag counts:");
    if agg.flag_counts.is_empty() {
        println!("  (none)");
    }
    for (f, c) in &agg.flag_counts {
        println!("  {:<20} {c}", f.as_str());
    }
    if let Some(b) = &agg.position_bias {
        println!();
        println!(
            "mean relative position: {}  last-point hit rate (slop {}): {}",
            sig9(b.mean_position),
            b.slop,
            sig9(b.last_point_hit_rate)
        );
    }
    for f in &agg.corpus_flags {
        println!("corpus flag: {f}");
    }
}
