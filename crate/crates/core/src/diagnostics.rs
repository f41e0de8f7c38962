//! Label-quality metrics: anomaly density, position bias toward the series
//! end, subsequence features, and a nearest-neighbor scan for labels that
//! look inconsistent with the rest of the data.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discord::WindowStats;
use crate::error::DiagnosticsError;
use crate::model::{LabelSet, Region, TimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMetrics {
    pub anomaly_fraction: f64,
    pub region_count: usize,
    pub max_region_fraction: f64,
    /// Fewest normal samples between two consecutive regions.
    pub min_inter_region_gap: Option<usize>,
    pub labeled_samples: usize,
}

pub fn density_metrics(labels: &LabelSet) -> DensityMetrics {
    let n = labels.series_length().max(1) as f64;
    let regions = labels.regions();
    let labeled_samples = labels.labeled_count();
    let max_len = regions.iter().map(Region::len).max().unwrap_or(0);
    let min_inter_region_gap = regions.windows(2).map(|w| w[1].start - w[0].end - 1).min();
    DensityMetrics {
        anomaly_fraction: labeled_samples as f64 / n,
        region_count: regions.len(),
        max_region_fraction: max_len as f64 / n,
        min_inter_region_gap,
        labeled_samples,
    }
}

/// Benchmark flaws the auditor can raise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlawFlag {
    Trivial,
    HighDensity,
    MultipleAnomalies,
    Sandwich,
    LabelFnCandidate,
    LabelFpCandidate,
    RunToFailureBias,
}

impl FlawFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            FlawFlag::Trivial => "TRIVIAL",
            FlawFlag::HighDensity => "HIGH_DENSITY",
            FlawFlag::MultipleAnomalies => "MULTIPLE_ANOMALIES",
            FlawFlag::Sandwich => "SANDWICH",
            FlawFlag::LabelFnCandidate => "LABEL_FN_CANDIDATE",
            FlawFlag::LabelFpCandidate => "LABEL_FP_CANDIDATE",
            FlawFlag::RunToFailureBias => "RUN_TO_FAILURE_BIAS",
        }
    }
}

impl fmt::Display for FlawFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the density and position flags trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagThresholds {
    pub high_density_fraction: f64,
    pub sandwich_max_gap: usize,
    pub run_to_failure_mean: f64,
}

impl Default for FlagThresholds {
    fn default() -> Self {
        Self {
            high_density_fraction: 1.0 / 3.0,
            sandwich_max_gap: 2,
            run_to_failure_mean: 0.7,
        }
    }
}

pub fn density_flags(d: &DensityMetrics, t: &FlagThresholds) -> Vec<FlawFlag> {
    let mut flags = Vec::new();
    if d.max_region_fraction >= t.high_density_fraction {
        flags.push(FlawFlag::HighDensity);
    }
    if d.region_count > 1 {
        flags.push(FlawFlag::MultipleAnomalies);
    }
    if d.min_inter_region_gap.is_some_and(|g| g <= t.sandwich_max_gap) {
        flags.push(FlawFlag::Sandwich);
    }
    flags
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionBias {
    pub relative_positions: Vec<f64>,
    pub mean_position: f64,
    pub last_point_hit_rate: f64,
    pub slop: usize,
}

/// End of the rightmost region divided by `n - 1`.
pub fn relative_position(labels: &LabelSet) -> Option<f64> {
    let last = labels.last()?;
    let n = labels.series_length();
    Some(if n <= 1 { 1.0 } else { last.end as f64 / (n - 1) as f64 })
}

/// Whether predicting the final sample would land in the rightmost region
/// widened by `slop`.
pub fn last_point_hit(labels: &LabelSet, slop: usize) -> Option<bool> {
    let n = labels.series_length();
    labels.last().map(|r| r.dilate(slop, n).contains(n - 1))
}

pub fn position_bias(corpus: &[LabelSet], slop: usize) -> Result<PositionBias, DiagnosticsError> {
    if corpus.is_empty() {
        return Err(DiagnosticsError::EmptyCorpus);
    }
    let mut relative_positions = Vec::with_capacity(corpus.len());
    let mut hits = 0usize;
    for labels in corpus {
        let pos = relative_position(labels).ok_or(DiagnosticsError::EmptyLabels)?;
        relative_positions.push(pos);
        hits += usize::from(last_point_hit(labels, slop).unwrap_or(false));
    }
    let count = relative_positions.len() as f64;
    Ok(PositionBias {
        mean_position: relative_positions.iter().sum::<f64>() / count,
        last_point_hit_rate: hits as f64 / count,
        relative_positions,
        slop,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubseqFeatures {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub variance: f64,
    pub lag1_autocorr: f64,
    /// Square root of the summed squared first differences.
    pub complexity: f64,
}

pub fn subsequence_features(ts: &TimeSeries, r: Region) -> Result<SubseqFeatures, DiagnosticsError> {
    if r.end >= ts.len() {
        return Err(DiagnosticsError::RegionOutOfBounds {
            start: r.start,
            end: r.end,
            len: ts.len(),
        });
    }
    if r.len() < 2 {
        return Err(DiagnosticsError::RegionTooShort {
            start: r.start,
            end: r.end,
        });
    }
    Ok(features(&ts.values()[r.start..=r.end]))
}

pub(crate) fn features(x: &[f64]) -> SubseqFeatures {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let variance = ss / (n - 1.0);
    let lag1_autocorr = if ss > 0.0 {
        let cross: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        (cross / ss).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let complexity = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>().sqrt();
    SubseqFeatures {
        mean: mean.clamp(min, max),
        min,
        max,
        variance,
        lag1_autocorr,
        complexity,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingKind {
    /// An unlabeled subsequence that closely matches a labeled anomaly.
    FnCandidate,
    /// A labeled anomaly that closely matches unlabeled data.
    FpCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyFinding {
    pub kind: FindingKind,
    pub location: Region,
    pub reference: Region,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyParams {
    pub sublen: usize,
    /// Matches closer than `alpha` times the typical nearest-neighbor
    /// distance are reported.
    pub alpha: f64,
    pub seed: u64,
    pub sample_size: usize,
    /// Candidate subsequences may not come within this many samples of a label.
    pub label_dilation: usize,
}

impl ConsistencyParams {
    pub fn new(sublen: usize) -> Self {
        Self {
            sublen,
            alpha: 0.5,
            seed: 0,
            sample_size: 256,
            label_dilation: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyScan {
    pub findings: Vec<ConsistencyFinding>,
    /// Median nearest-neighbor distance of the sampled unlabeled subsequences.
    pub median_nn_distance: Option<f64>,
    pub threshold: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// Compares each labeled anomaly with every unlabeled subsequence.
///
/// Unlabeled near-copies of a labeled anomaly are reported as
/// `FnCandidate`s (non-overlapping, closest first), and a labeled anomaly
/// whose nearest unlabeled neighbor is that close is reported as an
/// `FpCandidate`. Either hypothesis may explain a match; both go to review.
pub fn label_consistency_scan(
    ts: &TimeSeries,
    labels: &LabelSet,
    p: &ConsistencyParams,
) -> Result<ConsistencyScan, DiagnosticsError> {
    let n = ts.len();
    let m = p.sublen;
    if m < 4 || m > n / 2 {
        return Err(DiagnosticsError::BadSublen { sublen: m, len: n });
    }
    if labels.is_empty() {
        return Err(DiagnosticsError::EmptyLabels);
    }
    let global_mean = ts.values().iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = ts.values().iter().map(|v| v - global_mean).collect();
    let stats = WindowStats::new(&x, m, 1e-8);
    let count = n - m + 1;
    let exclusion = (m / 2).max(1);

    let blocked = labels.dilated(p.label_dilation);
    let admissible: Vec<usize> = (0..count)
        .filter(|&j| {
            let span = Region {
                start: j,
                end: j + m - 1,
            };
            !blocked.regions().iter().any(|r| r.intersects(&span))
        })
        .collect();
    if admissible.is_empty() {
        return Ok(ConsistencyScan {
            findings: Vec::new(),
            median_nn_distance: None,
            threshold: None,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let k = p.sample_size.min(admissible.len());
    let mut sampled: Vec<usize> = sample(&mut rng, admissible.len(), k)
        .into_iter()
        .map(|idx| admissible[idx])
        .collect();
    sampled.sort_unstable();
    let nn: Vec<f64> = sampled
        .par_iter()
        .filter_map(|&i| {
            admissible
                .iter()
                .filter(|&&j| i.abs_diff(j) >= exclusion)
                .map(|&j| stats.distance(&x, m, i, j))
                .min_by(f64::total_cmp)
        })
        .collect();
    let median_nn_distance = median(nn);
    let Some(median_nn) = median_nn_distance else {
        return Ok(ConsistencyScan {
            findings: Vec::new(),
            median_nn_distance: None,
            threshold: None,
        });
    };
    let threshold = p.alpha * median_nn;

    let mut findings = Vec::new();
    for region in labels.regions() {
        let center = region.start + (region.end - region.start) / 2;
        let q = center.saturating_sub(m / 2).min(count - 1);
        let profile: Vec<(usize, f64)> = admissible
            .par_iter()
            .filter(|&&j| j.abs_diff(q) >= exclusion)
            .map(|&j| (j, stats.distance(&x, m, q, j)))
            .collect();

        let mut close: Vec<(usize, f64)> = profile.iter().copied().filter(|&(_, d)| d <= threshold).collect();
        close.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut taken: BTreeSet<usize> = BTreeSet::new();
        for (j, d) in close {
            if taken.iter().all(|&t| t.abs_diff(j) >= m) {
                taken.insert(j);
                findings.push(ConsistencyFinding {
                    kind: FindingKind::FnCandidate,
                    location: Region {
                        start: j,
                        end: j + m - 1,
                    },
                    reference: *region,
                    distance: d,
                });
            }
        }

        let nearest = profile
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((j, d)) = nearest.filter(|&(_, d)| d <= threshold) {
            findings.push(ConsistencyFinding {
                kind: FindingKind::FpCandidate,
                location: *region,
                reference: Region {
                    start: j,
                    end: j + m - 1,
                },
                distance: d,
            });
        }
    }
    findings.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.location.cmp(&b.location))
            .then(a.reference.cmp(&b.reference))
    });
    Ok(ConsistencyScan {
        findings,
        median_nn_distance: Some(median_nn),
        threshold: Some(threshold),
    })
}
