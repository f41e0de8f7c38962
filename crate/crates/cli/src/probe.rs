use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::Args;
use tsaudit_core::detectors::NamedDetector;
use tsaudit_core::perturb::{invariance_probe, Perturbation};
use tsaudit_core::report::canonical_value;
use tsaudit_core::Region;

use crate::input::{load, FormatArg};
use crate::{runtime, usage, Outcome};

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(value_name = "FILE")]
    pub file: PathBuf,

    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,

    /// discord[:m=..][:exclusion=..], global-max, last-point, or
    /// oneliner:<family>[:k=..][:c=..][:b=..]
    #[arg(long, default_value = "discord")]
    pub detector: NamedDetector,

    /// Comma-separated perturbations, e.g. gaussian-noise:sigma=0.1,amplitude-scale:3
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub perturbations: Vec<Perturbation>,

    /// Ground-truth region as "start,end" (default: the series' single label).
    #[arg(long, value_name = "START,END")]
    pub truth: Option<String>,

    #[arg(long, default_value_t = 100)]
    pub slop: usize,

    /// Write the probe report (JSON) here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn parse_truth(s: &str) -> anyhow::Result<Region> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("--truth expects START,END"))?;
    Ok(Region::new(a.trim().parse()?, b.trim().parse()?)?)
}

pub fn run(a: ProbeArgs, seed: u64) -> Outcome {
    let l = load(&a.file, a.format).map_err(runtime)?;
    let truth = match &a.truth {
        Some(t) => parse_truth(t).map_err(usage)?,
        None => match l.labels.as_ref().map(|x| x.regions()) {
            Some([r]) => *r,
            _ => {
                return Err(usage(anyhow!(
                    "{}: needs exactly one labeled region, or pass --truth",
                    a.file.display()
                )))
            }
        },
    };
    let report = invariance_probe(
        a.detector.as_score_detector(),
        &l.series,
        truth,
        &a.perturbations,
        a.slop,
        seed,
    )
    .map_err(runtime)?;

    println!(
        "detector: {}  truth: {}-{}  slop: {}",
        report.detector, truth.start, truth.end, report.slop
    );
    println!(
        "{:<40} {:>10} {:>10} {:>6} {:>6}",
        "perturbation", "before", "after", "hit0", "hit1"
    );
    for e in &report.entries {
        let after = e.argmax_after.map_or("-".to_string(), |x| x.to_string());
        let hit = e.hit_after.map_or("-".to_string(), |x| x.to_string());
        println!(
            "{:<40} {:>10} {:>10} {:>6} {:>6}",
            e.perturbation, e.argmax_before, after, e.hit_before, hit
        );
        if let Some(err) = &e.error {
            println!("    error: {err}");
        }
    }
    if let Some(out) = &a.out {
        let v = canonical_value(&report).map_err(runtime)?;
        let mut text = serde_json::to_string_pretty(&v).map_err(runtime)?;
        text.push('\n');
        fs::write(out, text)
            .with_context(|| format!("cannot write {}", out.display()))
            .map_err(runtime)?;
    }
    Ok(ExitCode::SUCCESS)
}
