//! One-liner detectors and the brute-force triviality search.
//!
//! Every detector in the family thresholds either `diff(TS)` or
//! `abs(diff(TS))`, optionally against a centered moving mean and moving
//! standard deviation:
//!
//! ```text
//! x > u * movmean(x, k) + c * movstd(x, k) + b      x = diff(TS) or abs(diff(TS))
//! ```
//!
//! A comparison true at diff index `i` flags sample `i + 1`. The constant-run
//! detector instead flags every sample of a run of at least `run_len` exactly
//! equal consecutive values.
//!
//! The search walks families from simplest to most general and, within a
//! family, returns the solving spec that is smallest in `(b, k, c, u)` order.
//! For a fixed `(u, k, c)` the flag set only changes when `b` crosses a value
//! of the residual `x - u*movmean - c*movstd`, so midpoints between distinct
//! residual values enumerate every achievable flag set.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::OneLinerError;
use crate::model::{LabelSet, TimeSeries};
use crate::numfmt::sig9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyId {
    /// `abs(diff) > u*movmean + c*movstd + b`
    GeneralAbs,
    /// `diff > u*movmean + c*movstd + b`
    General,
    /// `abs(diff) > b`
    AbsDiffThresh,
    /// `abs(diff) > movmean + c*movstd + b`
    AbsDiffMov,
    /// `diff > b`
    DiffThresh,
    /// `diff > movmean + c*movstd + b`
    DiffMov,
    /// runs of identical consecutive samples
    ConstRun,
}

impl FamilyId {
    pub const ALL: [FamilyId; 7] = [
        FamilyId::GeneralAbs,
        FamilyId::General,
        FamilyId::AbsDiffThresh,
        FamilyId::AbsDiffMov,
        FamilyId::DiffThresh,
        FamilyId::DiffMov,
        FamilyId::ConstRun,
    ];

    /// Simplest first; the general forms only after their simplified ones.
    pub const SEARCH_ORDER: [FamilyId; 7] = [
        FamilyId::AbsDiffThresh,
        FamilyId::DiffThresh,
        FamilyId::AbsDiffMov,
        FamilyId::DiffMov,
        FamilyId::GeneralAbs,
        FamilyId::General,
        FamilyId::ConstRun,
    ];

    /// The four simplified forms used for the Yahoo tabulation.
    pub const SIMPLIFIED: [FamilyId; 4] = [
        FamilyId::AbsDiffThresh,
        FamilyId::AbsDiffMov,
        FamilyId::DiffThresh,
        FamilyId::DiffMov,
    ];

    pub fn is_pure_threshold(self) -> bool {
        matches!(self, FamilyId::AbsDiffThresh | FamilyId::DiffThresh)
    }

    pub fn uses_abs(self) -> bool {
        matches!(
            self,
            FamilyId::GeneralAbs | FamilyId::AbsDiffThresh | FamilyId::AbsDiffMov
        )
    }

    pub fn equation(self) -> Option<u8> {
        match self {
            FamilyId::GeneralAbs => Some(1),
            FamilyId::General => Some(2),
            FamilyId::AbsDiffThresh => Some(3),
            FamilyId::AbsDiffMov => Some(4),
            FamilyId::DiffThresh => Some(5),
            FamilyId::DiffMov => Some(6),
            FamilyId::ConstRun => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::GeneralAbs => "general-abs",
            FamilyId::General => "general",
            FamilyId::AbsDiffThresh => "abs-diff-thresh",
            FamilyId::AbsDiffMov => "abs-diff-mov",
            FamilyId::DiffThresh => "diff-thresh",
            FamilyId::DiffMov => "diff-mov",
            FamilyId::ConstRun => "const-run",
        }
    }

    /// `(u, k, c)` combinations this family ranges over, in search order.
    fn combos(self, grid: &SearchGrid, max_k: usize) -> Vec<(u8, usize, f64)> {
        let us: &[u8] = match self {
            FamilyId::GeneralAbs | FamilyId::General => &[0, 1],
            FamilyId::AbsDiffMov | FamilyId::DiffMov => &[1],
            _ => return vec![(0, 1, 0.0)],
        };
        let mut out = Vec::new();
        for &k in grid.k_candidates.iter().filter(|&&k| k <= max_k) {
            for &c in &grid.c_candidates {
                for &u in us {
                    out.push((u, k, c));
                }
            }
        }
        out
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = String;

    /// Accepts the kebab-case names as well as `eq1`..`eq6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let fam = match s.as_str() {
            "general-abs" | "eq1" | "1" => FamilyId::GeneralAbs,
            "general" | "eq2" | "2" => FamilyId::General,
            "abs-diff-thresh" | "eq3" | "3" => FamilyId::AbsDiffThresh,
            "abs-diff-mov" | "eq4" | "4" => FamilyId::AbsDiffMov,
            "diff-thresh" | "eq5" | "5" => FamilyId::DiffThresh,
            "diff-mov" | "eq6" | "6" => FamilyId::DiffMov,
            "const-run" | "construn" => FamilyId::ConstRun,
            other => return Err(format!("unknown one-liner family '{other}'")),
        };
        Ok(fam)
    }
}

/// One concrete detector: a family plus its parameters.
///
/// Unused parameters are normalized (`u = 0, k = 1, c = 0` for the pure
/// threshold forms, `run_len = 0` outside `ConstRun`) so equal detectors
/// compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneLinerSpec {
    pub family: FamilyId,
    pub u: u8,
    pub k: usize,
    pub c: f64,
    pub b: f64,
    pub run_len: usize,
}

impl OneLinerSpec {
    /// Builds and normalizes a spec, validating parameter ranges.
    pub fn new(family: FamilyId, u: u8, k: usize, c: f64, b: f64, run_len: usize) -> Result<Self, OneLinerError> {
        let spec = match family {
            FamilyId::AbsDiffThresh | FamilyId::DiffThresh => Self {
                family,
                u: 0,
                k: 1,
                c: 0.0,
                b,
                run_len: 0,
            },
            FamilyId::AbsDiffMov | FamilyId::DiffMov => Self {
                family,
                u: 1,
                k,
                c,
                b,
                run_len: 0,
            },
            FamilyId::GeneralAbs | FamilyId::General => Self {
                family,
                u: u.min(1),
                k,
                c,
                b,
                run_len: 0,
            },
            FamilyId::ConstRun => Self {
                family,
                u: 0,
                k: 1,
                c: 0.0,
                b: 0.0,
                run_len,
            },
        };
        if spec.k == 0 {
            return Err(OneLinerError::ZeroWindow);
        }
        if !(spec.c.is_finite() && spec.c >= 0.0) {
            return Err(OneLinerError::BadCoefficient(spec.c));
        }
        if !spec.b.is_finite() {
            return Err(OneLinerError::BadOffset(spec.b));
        }
        if family == FamilyId::ConstRun && run_len < 2 {
            return Err(OneLinerError::BadRunLength { run_len, len: 0 });
        }
        Ok(spec)
    }

    pub fn threshold(family: FamilyId, b: f64) -> Result<Self, OneLinerError> {
        Self::new(family, 0, 1, 0.0, b, 0)
    }

    pub fn const_run(run_len: usize) -> Result<Self, OneLinerError> {
        Self::new(FamilyId::ConstRun, 0, 1, 0.0, 0.0, run_len)
    }

    /// The detector written as a MATLAB-style expression, e.g.
    /// `abs(diff(TS)) > 5`.
    pub fn expression(&self) -> String {
        let x = if self.family.uses_abs() {
            "abs(diff(TS))"
        } else {
            "diff(TS)"
        };
        let offset = if self.b < 0.0 {
            format!(" - {}", sig9(-self.b))
        } else {
            format!(" + {}", sig9(self.b))
        };
        match self.family {
            FamilyId::AbsDiffThresh | FamilyId::DiffThresh => format!("{x} > {}", sig9(self.b)),
            FamilyId::AbsDiffMov | FamilyId::DiffMov => format!(
                "{x} > movmean({x}, {k}) + {c}*movstd({x}, {k}){offset}",
                k = self.k,
                c = sig9(self.c),
            ),
            FamilyId::GeneralAbs | FamilyId::General => format!(
                "{x} > {u}*movmean({x}, {k}) + {c}*movstd({x}, {k}){offset}",
                u = self.u,
                k = self.k,
                c = sig9(self.c),
            ),
            FamilyId::ConstRun => format!("movmax(abs(diff(TS)), [0 {}]) == 0", self.run_len.saturating_sub(2)),
        }
    }

    /// Lexicographic `(b, k, c, u)` order used to pick the winner in a family.
    fn search_cmp(&self, other: &Self) -> Ordering {
        self.b
            .total_cmp(&other.b)
            .then(self.k.cmp(&other.k))
            .then(self.c.total_cmp(&other.c))
            .then(self.u.cmp(&other.u))
            .then(self.run_len.cmp(&other.run_len))
    }
}

impl fmt::Display for OneLinerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.expression())
    }
}

/// Point tolerance used to decide whether flags match the labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveCriterion {
    pub w: usize,
}

impl Default for SolveCriterion {
    fn default() -> Self {
        Self { w: 1 }
    }
}

/// How the offset `b` is enumerated for each `(u, k, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetSearch {
    /// Every midpoint between distinct residual values is considered; the
    /// smallest solving one is found in closed form.
    Exhaustive,
    /// Only `max_b_candidates` quantile-subsampled midpoints are tried.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub k_candidates: Vec<usize>,
    pub c_candidates: Vec<f64>,
    pub max_b_candidates: usize,
    /// Minimum run lengths tried for the constant-run detector.
    pub run_len_candidates: Vec<usize>,
    pub offset_search: OffsetSearch,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            k_candidates: vec![3, 5, 10, 21, 50, 101],
            c_candidates: vec![0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0],
            max_b_candidates: 512,
            run_len_candidates: vec![3, 5, 10, 20],
            offset_search: OffsetSearch::Exhaustive,
        }
    }
}

impl SearchGrid {
    /// Sorts and deduplicates candidates and checks the grid invariants.
    pub fn normalized(mut self) -> Result<Self, OneLinerError> {
        self.k_candidates.sort_unstable();
        self.k_candidates.dedup();
        self.c_candidates.sort_by(f64::total_cmp);
        self.c_candidates.dedup();
        self.run_len_candidates.sort_unstable();
        self.run_len_candidates.dedup();
        if self.k_candidates.is_empty() || self.c_candidates.is_empty() {
            return Err(OneLinerError::BadGrid(
                "k and c candidate sets must be non-empty".into(),
            ));
        }
        if self.k_candidates[0] == 0 {
            return Err(OneLinerError::ZeroWindow);
        }
        if let Some(&c) = self.c_candidates.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(OneLinerError::BadCoefficient(c));
        }
        if !self.k_candidates.contains(&5) || !self.c_candidates.contains(&0.0) {
            return Err(OneLinerError::BadGrid(
                "k candidates must include 5 and c candidates must include 0".into(),
            ));
        }
        if self.max_b_candidates == 0 {
            return Err(OneLinerError::BadGrid("max_b_candidates must be positive".into()));
        }
        if self.run_len_candidates.is_empty() || self.run_len_candidates[0] < 2 {
            return Err(OneLinerError::BadGrid("run lengths must be non-empty and >= 2".into()));
        }
        Ok(self)
    }
}

/// First differences, `d[i] = x[i+1] - x[i]`.
pub fn diff_series(ts: &TimeSeries) -> Vec<f64> {
    diff(ts.values())
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Window bounds `[lo, hi]` of the centered, boundary-shrinking window of
/// nominal length `k` around `i`.
fn window(i: usize, k: usize, n: usize) -> (usize, usize) {
    let before = (k - 1) / 2;
    let after = k / 2;
    (i.saturating_sub(before), (i + after).min(n - 1))
}

/// Centered moving mean with windows that shrink at the boundaries.
pub fn moving_mean(x: &[f64], k: usize) -> Vec<f64> {
    assert!(k >= 1, "window length must be at least 1");
    let n = x.len();
    (0..n)
        .map(|i| {
            let (lo, hi) = window(i, k, n);
            let w = &x[lo..=hi];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect()
}

/// Centered moving sample standard deviation (divisor `count - 1`, zero for
/// single-sample windows), same windowing as [`moving_mean`].
pub fn moving_std(x: &[f64], k: usize) -> Vec<f64> {
    assert!(k >= 1, "window length must be at least 1");
    let n = x.len();
    (0..n)
        .map(|i| {
            let (lo, hi) = window(i, k, n);
            window_std(&x[lo..=hi])
        })
        .collect()
}

fn window_std(w: &[f64]) -> f64 {
    if w.len() < 2 {
        return 0.0;
    }
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let ss: f64 = w.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (w.len() - 1) as f64).sqrt()
}

/// The signal a family compares: `diff(TS)` or `abs(diff(TS))`.
fn transformed(values: &[f64], family: FamilyId) -> Vec<f64> {
    let mut d = diff(values);
    if family.uses_abs() {
        d.iter_mut().for_each(|v| *v = v.abs());
    }
    d
}

/// `x - (u*movmean + c*movstd)`; the detector fires where this exceeds `b`.
fn residual(x: &[f64], u: u8, c: f64, stats: Option<&MovingStats>) -> Vec<f64> {
    match stats {
        None => x.to_vec(),
        Some(s) => x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut rhs = 0.0;
                if u == 1 {
                    rhs += s.mean[i];
                }
                if c != 0.0 {
                    rhs += c * s.std[i];
                }
                v - rhs
            })
            .collect(),
    }
}

struct MovingStats {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl MovingStats {
    fn new(x: &[f64], k: usize) -> Self {
        Self {
            mean: moving_mean(x, k),
            std: moving_std(x, k),
        }
    }
}

/// Runs a detector and returns the flagged sample indices, ascending.
pub fn apply_oneliner(spec: &OneLinerSpec, ts: &TimeSeries) -> Result<Vec<usize>, OneLinerError> {
    let values = ts.values();
    if spec.family == FamilyId::ConstRun {
        return const_run_flags(values, spec.run_len);
    }
    let x = transformed(values, spec.family);
    if spec.k > x.len() {
        return Err(OneLinerError::WindowTooLong {
            k: spec.k,
            len: x.len(),
        });
    }
    let stats =
        (!spec.family.is_pure_threshold() && (spec.u == 1 || spec.c != 0.0)).then(|| MovingStats::new(&x, spec.k));
    let r = residual(&x, spec.u, spec.c, stats.as_ref());
    Ok(flags_above(&r, spec.b))
}

fn flags_above(residual: &[f64], b: f64) -> Vec<usize> {
    residual
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > b)
        .map(|(i, _)| i + 1)
        .collect()
}

fn const_run_flags(values: &[f64], run_len: usize) -> Result<Vec<usize>, OneLinerError> {
    if run_len < 2 || run_len > values.len() {
        return Err(OneLinerError::BadRunLength {
            run_len,
            len: values.len(),
        });
    }
    let mut flags = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        #[allow(clippy::float_cmp)]
        let continues = i < values.len() && values[i] == values[i - 1];
        if !continues {
            if i - start >= run_len {
                flags.extend(start..i);
            }
            start = i;
        }
    }
    Ok(flags)
}

/// Perfect detection under point tolerance `w`: every labeled region
/// (widened by `w`) holds a flag and every flag is within `w` of a label.
pub fn is_solved(flags: &[usize], labels: &LabelSet, crit: SolveCriterion) -> Result<bool, OneLinerError> {
    if labels.is_empty() {
        return Err(OneLinerError::EmptyLabels);
    }
    let mut sorted = flags.to_vec();
    sorted.sort_unstable();
    let allowed = labels.dilated(crit.w);
    if sorted.iter().any(|&f| !allowed.contains(f)) {
        return Ok(false);
    }
    let n = labels.series_length();
    Ok(labels.regions().iter().all(|r| {
        let d = r.dilate(crit.w, n);
        let pos = sorted.partition_point(|&f| f < d.start);
        pos < sorted.len() && sorted[pos] <= d.end
    }))
}

/// Midpoints between consecutive distinct values of `x`, ascending.
///
/// When there are more than `max_count`, evenly spaced ranks are kept,
/// always including the first and last midpoint.
pub fn threshold_candidates(x: &[f64], max_count: usize) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| a == b);
    let mids: Vec<f64> = v.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    if mids.len() <= max_count {
        return mids;
    }
    match max_count {
        0 => Vec::new(),
        1 => vec![mids[0]],
        m => {
            let last = mids.len() - 1;
            let mut picked: Vec<f64> = (0..m)
                .map(|j| mids[((j as f64) * last as f64 / (m - 1) as f64).round() as usize])
                .collect();
            picked.dedup();
            picked
        }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    a + (b - a) / 2.0
}

/// Per-series bookkeeping for the offset search of one `(u, k, c)`.
struct Separation {
    /// largest residual at a diff index that must stay unflagged
    max_outside: Option<f64>,
    /// smallest, over labeled regions, of the largest residual that can cover it
    min_region_max: f64,
}

impl Separation {
    fn new(r: &[f64], labels: &LabelSet, w: usize) -> Option<Self> {
        let n = labels.series_length();
        let allowed = labels.dilated(w);
        let max_outside = r
            .iter()
            .enumerate()
            .filter(|&(i, _)| !allowed.contains(i + 1))
            .map(|(_, &v)| v)
            .max_by(f64::total_cmp);
        let mut min_region_max = f64::INFINITY;
        for reg in labels.regions() {
            let d = reg.dilate(w, n);
            // sample j is flagged by diff index j - 1
            let lo = d.start.max(1) - 1;
            if d.end == 0 {
                return None;
            }
            let hi = d.end - 1;
            let m = r[lo..=hi].iter().copied().max_by(f64::total_cmp)?;
            min_region_max = min_region_max.min(m);
        }
        Some(Self {
            max_outside,
            min_region_max,
        })
    }

    fn solves(&self, b: f64) -> bool {
        self.max_outside.is_none_or(|mo| b >= mo) && b < self.min_region_max
    }

    /// Smallest midpoint between distinct residual values that separates.
    fn smallest_offset(&self, r: &[f64]) -> Option<f64> {
        let b = match self.max_outside {
            Some(mo) => {
                let next = r.iter().copied().filter(|&v| v > mo).min_by(f64::total_cmp)?;
                midpoint(mo, next)
            }
            None => {
                let lo = r.iter().copied().min_by(f64::total_cmp)?;
                let next = r.iter().copied().filter(|&v| v > lo).min_by(f64::total_cmp)?;
                midpoint(lo, next)
            }
        };
        self.solves(b).then_some(b)
    }
}

fn check_labels(ts: &TimeSeries, labels: &LabelSet) -> Result<(), OneLinerError> {
    if labels.is_empty() {
        return Err(OneLinerError::EmptyLabels);
    }
    if labels.series_length() != ts.len() {
        return Err(OneLinerError::LengthMismatch {
            labels: labels.series_length(),
            series: ts.len(),
        });
    }
    Ok(())
}

/// Searches one family; returns its `(b, k, c, u)`-smallest solving spec.
pub fn search_family(
    ts: &TimeSeries,
    labels: &LabelSet,
    family: FamilyId,
    grid: &SearchGrid,
    crit: SolveCriterion,
) -> Result<Option<OneLinerSpec>, OneLinerError> {
    check_labels(ts, labels)?;
    if family == FamilyId::ConstRun {
        for &run_len in grid.run_len_candidates.iter().filter(|&&r| r <= ts.len()) {
            let spec = OneLinerSpec::const_run(run_len)?;
            if is_solved(&apply_oneliner(&spec, ts)?, labels, crit)? {
                return Ok(Some(spec));
            }
        }
        return Ok(None);
    }

    let x = transformed(ts.values(), family);
    let combos = family.combos(grid, x.len());
    let needs_stats = !family.is_pure_threshold();
    let ks: Vec<usize> = if needs_stats {
        grid.k_candidates.iter().copied().filter(|&k| k <= x.len()).collect()
    } else {
        Vec::new()
    };
    let stats: Vec<(usize, MovingStats)> = ks.par_iter().map(|&k| (k, MovingStats::new(&x, k))).collect();

    let found: Vec<Option<OneLinerSpec>> = combos
        .par_iter()
        .map(|&(u, k, c)| {
            let s = stats.iter().find(|(kk, _)| *kk == k).map(|(_, s)| s);
            let r = residual(&x, u, c, if u == 1 || c != 0.0 { s } else { None });
            let sep = Separation::new(&r, labels, crit.w)?;
            let b = match grid.offset_search {
                OffsetSearch::Exhaustive => sep.smallest_offset(&r)?,
                OffsetSearch::Sampled => threshold_candidates(&r, grid.max_b_candidates)
                    .into_iter()
                    .find(|&b| sep.solves(b))?,
            };
            let spec = OneLinerSpec::new(family, u, k, c, b, 0).ok()?;
            // the closed form must agree with a direct evaluation
            let flags = flags_above(&r, b);
            is_solved(&flags, labels, crit).ok()?.then_some(spec)
        })
        .collect();
    Ok(found.into_iter().flatten().min_by(|a, b| a.search_cmp(b)))
}

/// Searches `families` in canonical order and returns the first solving spec.
pub fn brute_force_search(
    ts: &TimeSeries,
    labels: &LabelSet,
    families: &[FamilyId],
    grid: &SearchGrid,
    crit: SolveCriterion,
) -> Result<Option<OneLinerSpec>, OneLinerError> {
    check_labels(ts, labels)?;
    for family in FamilyId::SEARCH_ORDER.into_iter().filter(|f| families.contains(f)) {
        if let Some(spec) = search_family(ts, labels, family, grid, crit)? {
            return Ok(Some(spec));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrivialityOutcome {
    Solved(OneLinerSpec),
    Unsolved,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrivialityEntry {
    pub name: String,
    pub outcome: TrivialityOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrivialityReport {
    pub entries: Vec<TrivialityEntry>,
    pub solved: usize,
    pub total: usize,
    pub fraction: f64,
}

/// Runs [`brute_force_search`] over a corpus. Series that fail are recorded
/// and count as unsolved.
pub fn audit_triviality(
    corpus: &[(TimeSeries, LabelSet)],
    families: &[FamilyId],
    grid: &SearchGrid,
    crit: SolveCriterion,
) -> Result<TrivialityReport, OneLinerError> {
    if corpus.is_empty() {
        return Err(OneLinerError::EmptyCorpus);
    }
    let entries: Vec<TrivialityEntry> = corpus
        .par_iter()
        .map(|(ts, labels)| {
            let outcome = match brute_force_search(ts, labels, families, grid, crit) {
                Ok(Some(spec)) => TrivialityOutcome::Solved(spec),
                Ok(None) => TrivialityOutcome::Unsolved,
                Err(e) => TrivialityOutcome::Failed(e.to_string()),
            };
            TrivialityEntry {
                name: ts.name().to_string(),
                outcome,
            }
        })
        .collect();
    let solved = entries
        .iter()
        .filter(|e| matches!(e.outcome, TrivialityOutcome::Solved(_)))
        .count();
    let total = entries.len();
    Ok(TrivialityReport {
        entries,
        solved,
        total,
        fraction: solved as f64 / total as f64,
    })
}
