use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use tsaudit_core::detectors::{parse_oneliner_params, ArgmaxLocator, NamedDetector};
use tsaudit_core::discord::{discord_score, top_k_discords, DiscordParams};
use tsaudit_core::ingest::write_sidecar_series;
use tsaudit_core::numfmt::sig9;
use tsaudit_core::oneliner::{apply_oneliner, brute_force_search, is_solved, FamilyId, SearchGrid, SolveCriterion};
use tsaudit_core::perturb::{inject_anomaly, InjectionKind, InjectionSpec, Placement};
use tsaudit_core::plot::{render_svg, write_plot_bundle};
use tsaudit_core::scoring::{verdict, AccuracyReport, Locator, ScoringConfig};
use tsaudit_core::LabelSet;

use crate::input::{collect_files, load, FormatArg};
use crate::{runtime, usage, Outcome};

#[derive(Debug, Args)]
pub struct OnelinerArgs {
    #[arg(value_name = "FILE")]
    pub file: PathBuf,

    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,

    /// Family to evaluate (eq1..eq6 or const-run), or to restrict --search to.
    #[arg(long, value_delimiter = ',')]
    pub family: Vec<FamilyId>,

    /// Parameters for evaluation, e.g. "k=5,c=0,b=2.5" or "run_len=3".
    #[arg(long, default_value = "")]
    pub params: String,

    /// Search for the simplest one-liner that solves the labels.
    #[arg(long, conflicts_with = "params")]
    pub search: bool,

    /// Point tolerance w of the solve criterion.
    #[arg(long, default_value_t = 1)]
    pub tolerance: usize,
}

fn compress(flags: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        let mut j = i;
        while j + 1 < flags.len() && flags[j + 1] == flags[j] + 1 {
            j += 1;
        }
        parts.push(if i == j {
            flags[i].to_string()
        } else {
            format!("{}-{}", flags[i], flags[j])
        });
        i = j + 1;
    }
    parts.join(",")
}

pub fn oneliner(a: OnelinerArgs) -> Outcome {
    let l = load(&a.file, a.format).map_err(runtime)?;
    let crit = SolveCriterion { w: a.tolerance };
    let labels = l.labels.filter(|x| !x.is_empty());
    if a.search {
        let labels = labels.ok_or_else(|| runtime(anyhow!("{}: --search needs labels", a.file.display())))?;
        let families: Vec<FamilyId> = if a.family.is_empty() {
            FamilyId::SEARCH_ORDER.to_vec()
        } else {
            FamilyId::SEARCH_ORDER
                .iter()
                .copied()
                .filter(|f| a.family.contains(f))
                .collect()
        };
        match brute_force_search(&l.series, &labels, &families, &SearchGrid::default(), crit).map_err(runtime)? {
            Some(spec) => {
                println!("{}", spec.expression());
                println!("family: {}", spec.family);
            }
            None => println!("no solving one-liner found"),
        }
        return Ok(ExitCode::SUCCESS);
    }
    let [family] = a.family[..] else {
        return Err(usage(anyhow!("give exactly one --family to evaluate, or use --search")));
    };
    let spec = parse_oneliner_params(family, a.params.split(',')).map_err(|e| usage(anyhow!(e)))?;
    let flags = apply_oneliner(&spec, &l.series).map_err(usage)?;
    println!("{}", spec.expression());
    println!("flags ({}): {}", flags.len(), compress(&flags));
    if let Some(labels) = labels {
        let solved = is_solved(&flags, &labels, crit).map_err(runtime)?;
        println!("solved (w={}): {solved}", crit.w);
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Args)]
pub struct DiscordArgs {
    #[arg(value_name = "FILE")]
    pub file: PathBuf,

    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,

    /// Subsequence length m.
    #[arg(long, default_value_t = 64)]
    pub sublen: usize,

    /// Exclusion zone (default m/2).
    #[arg(long)]
    pub exclusion: Option<usize>,

    #[arg(long, default_value_t = 10)]
    pub topk: usize,

    /// Write the plot bundle here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Also write an SVG chart here.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

pub fn discord(a: DiscordArgs) -> Outcome {
    let l = load(&a.file, a.format).map_err(runtime)?;
    let mut p = DiscordParams::new(a.sublen);
    if let Some(e) = a.exclusion {
        p = p.with_exclusion(e);
    }
    p.validate(l.series.len()).map_err(usage)?;
    let trace = discord_score(&l.series, &p).map_err(runtime)?;
    println!("{:>4} {:>10} {:>14}  timestamp", "rank", "start", "score");
    for (rank, pos) in top_k_discords(&trace, a.topk, p.sublen).into_iter().enumerate() {
        let start = trace.original_index(pos);
        let stamp = l
            .timestamps
            .as_ref()
            .and_then(|t| t.get(start))
            .map_or("", String::as_str);
        println!(
            "{:>4} {:>10} {:>14}  {stamp}",
            rank + 1,
            start,
            sig9(trace.scores()[pos])
        );
    }
    let traces = [("discord".to_string(), trace)];
    if let Some(out) = &a.out {
        write_plot_bundle(&l.series, l.labels.as_ref(), &traces, l.timestamps.as_deref(), out).map_err(runtime)?;
    }
    if let Some(svg) = &a.svg {
        fs::write(svg, render_svg(&l.series, l.labels.as_ref(), &traces))
            .with_context(|| format!("cannot write {}", svg.display()))
            .map_err(runtime)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Directory (or files) of UCR-named series.
    #[arg(required = true, value_name = "PATH")]
    pub inputs: Vec<PathBuf>,

    /// Predictions, one "<series id> <index>" per line (comma or whitespace separated).
    #[arg(long, value_name = "FILE", required_unless_present = "detector")]
    pub pred: Option<PathBuf>,

    /// Predict with a built-in detector instead of a file.
    #[arg(long, conflicts_with = "pred")]
    pub detector: Option<NamedDetector>,

    #[arg(long, default_value_t = 100)]
    pub slop: usize,
}

fn read_predictions(path: &std::path::Path) -> anyhow::Result<HashMap<String, usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty());
        let (Some(id), Some(idx), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(anyhow!("{}:{}: expected '<series id> <index>'", path.display(), i + 1));
        };
        let idx: usize = idx
            .parse()
            .map_err(|_| anyhow!("{}:{}: '{idx}' is not an index", path.display(), i + 1))?;
        let id = std::path::Path::new(id)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(id);
        out.insert(id.to_string(), idx);
    }
    Ok(out)
}

pub fn score(a: ScoreArgs) -> Outcome {
    let files = collect_files(&a.inputs).map_err(runtime)?;
    let cfg = ScoringConfig { slop: a.slop };
    let preds = match &a.pred {
        Some(p) => Some(read_predictions(p).map_err(runtime)?),
        None => None,
    };
    let mut verdicts = Vec::with_capacity(files.len());
    for path in &files {
        let l = load(path, FormatArg::Ucr).map_err(runtime)?;
        let meta = l.ucr.clone().expect("UCR loader sets metadata");
        let id = l.series.name().to_string();
        let prediction = match (&preds, &a.detector) {
            (Some(p), _) => p.get(&id).copied().ok_or_else(|| {
                eprintln!("warning: no prediction for {id}; counted incorrect");
                "missing prediction".to_string()
            }),
            (None, Some(d)) => ArgmaxLocator(d.as_score_detector()).locate(l.series.train(), &l.series),
            (None, None) => unreachable!("clap requires --pred or --detector"),
        };
        let prediction = prediction.and_then(|p| {
            if p < l.series.len() {
                Ok(p)
            } else {
                Err(format!("prediction {p} is outside the series"))
            }
        });
        verdicts.push(verdict(&id, prediction, &meta, &cfg));
    }
    let report = AccuracyReport::from_verdicts(cfg.slop, verdicts);
    for v in &report.verdicts {
        let pred = v.prediction.map_or("-".to_string(), |p| p.to_string());
        println!(
            "{:<48} {:>10} {}",
            v.series_id,
            pred,
            if v.correct { "correct" } else { "wrong" }
        );
    }
    println!(
        "accuracy: {:.3} ({}/{}) with slop {}",
        report.accuracy, report.correct, report.total, report.slop
    );
    println!(
        "accuracy with slop = anomaly length: {:.3}",
        report.accuracy_length_slop
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Spike,
    Dropout,
    Freeze,
    CycleSplice,
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    /// Clean input series.
    #[arg(value_name = "FILE")]
    pub file: PathBuf,

    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,

    #[arg(long, value_enum)]
    pub kind: KindArg,

    /// Start of the anomaly (default: random, after train_end if known).
    #[arg(long)]
    pub at: Option<usize>,

    /// Spike size in standard deviations.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub magnitude: f64,

    /// Length of a dropout or freeze.
    #[arg(long, default_value_t = 50)]
    pub length: usize,

    /// Dropout fill value (default: 10 standard deviations below the minimum).
    #[arg(long, allow_negative_numbers = true)]
    pub value: Option<f64>,

    /// Donor window start for a cycle splice.
    #[arg(long)]
    pub donor: Option<usize>,

    /// Cycle length for a splice (estimated when absent).
    #[arg(long)]
    pub period: Option<usize>,

    /// Output series; labels go to <out>.regions.json.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

pub fn inject(a: InjectArgs, seed: u64) -> Outcome {
    let l = load(&a.file, a.format).map_err(runtime)?;
    let kind = match a.kind {
        KindArg::Spike => InjectionKind::Spike { magnitude: a.magnitude },
        KindArg::Dropout => InjectionKind::Dropout {
            length: a.length,
            value: a.value,
        },
        KindArg::Freeze => InjectionKind::Freeze { length: a.length },
        KindArg::CycleSplice => InjectionKind::CycleSplice {
            donor: a
                .donor
                .ok_or_else(|| usage(anyhow!("--kind cycle-splice needs --donor")))?,
            period: a.period,
        },
    };
    let spec = InjectionSpec {
        kind,
        location: a.at.map_or(Placement::Random, Placement::At),
        seed,
    };
    let (series, region) = inject_anomaly(&l.series, &spec).map_err(usage)?;
    let labels = LabelSet::new(vec![region], series.len()).map_err(runtime)?;
    write_sidecar_series(&a.out, &series, &labels)
        .with_context(|| format!("cannot write {}", a.out.display()))
        .map_err(runtime)?;
    println!("injected region: {} {}", region.start, region.end);
    Ok(ExitCode::SUCCESS)
}
