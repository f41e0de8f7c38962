//! Per-series audit records and corpus aggregates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    density_flags, density_metrics, label_consistency_scan, position_bias, relative_position, ConsistencyFinding,
    ConsistencyParams, DensityMetrics, FindingKind, FlagThresholds, FlawFlag, PositionBias,
};
use crate::discord::{discord_score, top_k_discords, DiscordParams};
use crate::error::DiagnosticsError;
use crate::model::{LabelSet, Region, TimeSeries};
use crate::oneliner::{brute_force_search, FamilyId, OneLinerSpec, SearchGrid, SolveCriterion};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Point tolerances swept by the triviality search.
    pub tolerances: Vec<usize>,
    pub families: Vec<FamilyId>,
    pub grid: SearchGrid,
    pub sublen: usize,
    pub alpha: f64,
    /// Number of discords recorded per series; 0 skips the discord pass.
    pub topk: usize,
    pub seed: u64,
    /// Slop used for the last-point hit rate.
    pub slop: usize,
    pub thresholds: FlagThresholds,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            tolerances: vec![1],
            families: FamilyId::SEARCH_ORDER.to_vec(),
            grid: SearchGrid::default(),
            sublen: 64,
            alpha: 0.5,
            topk: 3,
            seed: 0,
            slop: 100,
            thresholds: FlagThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub regions: Vec<Region>,
    pub labeled_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialityRecord {
    pub w: usize,
    pub solved: bool,
    pub spec: Option<OneLinerSpec>,
    pub expression: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRecord {
    pub findings: Vec<ConsistencyFinding>,
    pub median_nn_distance: Option<f64>,
    pub threshold: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordHit {
    /// Subsequence start.
    pub position: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordSummary {
    pub sublen: usize,
    pub exclusion: usize,
    pub top: Vec<DiscordHit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub series_id: String,
    pub group: Option<String>,
    pub n: usize,
    pub train_end: Option<usize>,
    pub labels: LabelSummary,
    pub triviality: Vec<TrivialityRecord>,
    pub density: DensityMetrics,
    pub relative_position: f64,
    pub flags: Vec<FlawFlag>,
    pub consistency: ConsistencyRecord,
    pub discord: Option<DiscordSummary>,
}

impl SeriesRecord {
    pub fn label_set(&self) -> Result<LabelSet, crate::error::ModelError> {
        LabelSet::new(self.labels.regions.clone(), self.n)
    }

    pub fn solved_at(&self, w: usize) -> bool {
        self.triviality.iter().any(|t| t.w == w && t.solved)
    }
}

/// Runs every per-series analysis. Labels must be non-empty; analyses that
/// cannot run on this series (too short for the subsequence length, say)
/// record their error instead of failing the record.
pub fn audit_series(
    ts: &TimeSeries,
    labels: &LabelSet,
    group: Option<&str>,
    cfg: &AuditConfig,
) -> Result<SeriesRecord, DiagnosticsError> {
    if labels.is_empty() {
        return Err(DiagnosticsError::EmptyLabels);
    }
    let triviality: Vec<TrivialityRecord> = cfg
        .tolerances
        .iter()
        .map(
            |&w| match brute_force_search(ts, labels, &cfg.families, &cfg.grid, SolveCriterion { w }) {
                Ok(found) => TrivialityRecord {
                    w,
                    solved: found.is_some(),
                    expression: found.map(|s| s.expression()),
                    spec: found,
                    error: None,
                },
                Err(e) => TrivialityRecord {
                    w,
                    solved: false,
                    spec: None,
                    expression: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();

    let density = density_metrics(labels);
    let mut flags = density_flags(&density, &cfg.thresholds);
    if triviality.iter().any(|t| t.solved) {
        flags.push(FlawFlag::Trivial);
    }

    let params = ConsistencyParams {
        alpha: cfg.alpha,
        seed: cfg.seed,
        ..ConsistencyParams::new(cfg.sublen)
    };
    let consistency = match label_consistency_scan(ts, labels, &params) {
        Ok(scan) => {
            if scan.findings.iter().any(|f| f.kind == FindingKind::FnCandidate) {
                flags.push(FlawFlag::LabelFnCandidate);
            }
            if scan.findings.iter().any(|f| f.kind == FindingKind::FpCandidate) {
                flags.push(FlawFlag::LabelFpCandidate);
            }
            ConsistencyRecord {
                findings: scan.findings,
                median_nn_distance: scan.median_nn_distance,
                threshold: scan.threshold,
                error: None,
            }
        }
        Err(e) => ConsistencyRecord {
            findings: Vec::new(),
            median_nn_distance: None,
            threshold: None,
            error: Some(e.to_string()),
        },
    };
    flags.sort_unstable();
    flags.dedup();

    let discord = (cfg.topk > 0).then(|| {
        let p = DiscordParams::new(cfg.sublen);
        match discord_score(ts, &p) {
            Ok(trace) => DiscordSummary {
                sublen: p.sublen,
                exclusion: p.exclusion,
                top: top_k_discords(&trace, cfg.topk, p.sublen)
                    .into_iter()
                    .map(|position| DiscordHit {
                        position,
                        score: trace.scores()[position],
                    })
                    .collect(),
                error: None,
            },
            Err(e) => DiscordSummary {
                sublen: p.sublen,
                exclusion: p.exclusion,
                top: Vec::new(),
                error: Some(e.to_string()),
            },
        }
    });

    Ok(SeriesRecord {
        series_id: ts.name().to_string(),
        group: group.map(str::to_string),
        n: ts.len(),
        train_end: ts.train_end(),
        labels: LabelSummary {
            regions: labels.regions().to_vec(),
            labeled_samples: labels.labeled_count(),
        },
        triviality,
        density,
        relative_position: relative_position(labels).expect("labels are non-empty"),
        flags,
        consistency,
        discord,
    })
}

/// One corpus item: series, labels and an optional group name.
pub type AuditInput = (TimeSeries, LabelSet, Option<String>);

/// Audits every series in parallel, keeping input order.
pub fn audit_corpus(inputs: &[AuditInput], cfg: &AuditConfig) -> Vec<Result<SeriesRecord, DiagnosticsError>> {
    inputs
        .par_iter()
        .map(|(ts, labels, group)| audit_series(ts, labels, group.as_deref(), cfg))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedCount {
    pub w: usize,
    pub solved: usize,
    pub total: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAggregate {
    pub series_count: usize,
    pub solved: Vec<SolvedCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusAggregates {
    pub series_count: usize,
    pub solved: Vec<SolvedCount>,
    pub position_bias: Option<PositionBias>,
    pub flag_counts: BTreeMap<FlawFlag, usize>,
    pub corpus_flags: Vec<FlawFlag>,
    pub groups: BTreeMap<String, GroupAggregate>,
}

fn solved_counts(records: &[&SeriesRecord], tolerances: &[usize]) -> Vec<SolvedCount> {
    tolerances
        .iter()
        .map(|&w| {
            let solved = records.iter().filter(|r| r.solved_at(w)).count();
            let total = records.len();
            SolvedCount {
                w,
                solved,
                total,
                fraction: if total == 0 { 0.0 } else { solved as f64 / total as f64 },
            }
        })
        .collect()
}

impl CorpusAggregates {
    pub fn compute(records: &[SeriesRecord], cfg: &AuditConfig) -> Result<Self, crate::error::ModelError> {
        let all: Vec<&SeriesRecord> = records.iter().collect();
        let labels = records
            .iter()
            .map(SeriesRecord::label_set)
            .collect::<Result<Vec<_>, _>>()?;
        let position_bias = position_bias(&labels, cfg.slop).ok();
        let mut flag_counts = BTreeMap::new();
        for f in records.iter().flat_map(|r| &r.flags) {
            *flag_counts.entry(*f).or_insert(0) += 1;
        }
        let corpus_flags = position_bias
            .as_ref()
            .filter(|b| b.mean_position > cfg.thresholds.run_to_failure_mean)
            .map(|_| vec![FlawFlag::RunToFailureBias])
            .unwrap_or_default();
        let mut by_group: BTreeMap<String, Vec<&SeriesRecord>> = BTreeMap::new();
        for r in records {
            if let Some(g) = &r.group {
                by_group.entry(g.clone()).or_default().push(r);
            }
        }
        let groups = by_group
            .into_iter()
            .map(|(g, rs)| {
                (
                    g,
                    GroupAggregate {
                        series_count: rs.len(),
                        solved: solved_counts(&rs, &cfg.tolerances),
                    },
                )
            })
            .collect();
        Ok(Self {
            series_count: records.len(),
            solved: solved_counts(&all, &cfg.tolerances),
            position_bias,
            flag_counts,
            corpus_flags,
            groups,
        })
    }

    pub fn any_flaw(&self) -> bool {
        !self.corpus_flags.is_empty() || self.flag_counts.values().any(|&c| c > 0)
    }
}
