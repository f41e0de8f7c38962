//! Core data model: series, labeled regions and score traces.
//!
//! Regions are inclusive on both ends, so a label written as `5400_5600`
//! covers samples 5400 through 5600. Label sets are kept normalized: sorted,
//! with overlapping or adjacent regions merged.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A named univariate series of finite samples with an optional training prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    values: Vec<f64>,
    train_end: Option<usize>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self, ModelError> {
        if values.len() < 2 {
            return Err(ModelError::TooShort { len: values.len() });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::NonFinite { index, value });
        }
        Ok(Self {
            name: name.into(),
            values,
            train_end: None,
        })
    }

    /// Attaches a training prefix `[0, train_end)`.
    pub fn with_train_end(mut self, train_end: usize) -> Result<Self, ModelError> {
        if train_end == 0 || train_end >= self.values.len() {
            return Err(ModelError::BadTrainEnd {
                train_end,
                len: self.values.len(),
            });
        }
        self.train_end = Some(train_end);
        Ok(self)
    }

    /// Builds a series with the same name and (if still valid) training split
    /// but different samples.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, ModelError> {
        let ts = Self::new(self.name.clone(), values)?;
        match self.train_end {
            Some(t) if t < ts.len() => ts.with_train_end(t),
            _ => Ok(ts),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: a valid series has at least two samples.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn train_end(&self) -> Option<usize> {
        self.train_end
    }

    /// The training prefix, or an empty slice when no split is declared.
    pub fn train(&self) -> &[f64] {
        &self.values[..self.train_end.unwrap_or(0)]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// An inclusive index interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Region {
    pub start: usize,
    pub end: usize,
}

impl Region {
    pub fn new(start: usize, end: usize) -> Result<Self, ModelError> {
        if start > end {
            return Err(ModelError::InvertedRegion { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn point(index: usize) -> Self {
        Self {
            start: index,
            end: index,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index <= self.end
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// Widens the region by `w` on each side, clamped to `[0, n-1]`.
    pub fn dilate(&self, w: usize, n: usize) -> Region {
        dilate_region(*self, w, n)
    }
}

pub fn dilate_region(r: Region, w: usize, n: usize) -> Region {
    debug_assert!(n > 0 && r.end < n);
    Region {
        start: r.start.saturating_sub(w),
        end: r.end.saturating_add(w).min(n.saturating_sub(1)),
    }
}

/// Ground-truth anomalies as sorted, disjoint, non-adjacent regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    regions: Vec<Region>,
    series_length: usize,
}

impl LabelSet {
    /// Normalizes arbitrary regions: sorts them and merges any that overlap
    /// or touch.
    pub fn new(mut regions: Vec<Region>, series_length: usize) -> Result<Self, ModelError> {
        for r in &regions {
            if r.start > r.end {
                return Err(ModelError::InvertedRegion {
                    start: r.start,
                    end: r.end,
                });
            }
            if r.end >= series_length {
                return Err(ModelError::RegionOutOfBounds {
                    start: r.start,
                    end: r.end,
                    len: series_length,
                });
            }
        }
        regions.sort_unstable();
        let mut merged: Vec<Region> = Vec::with_capacity(regions.len());
        for r in regions {
            match merged.last_mut() {
                Some(last) if r.start <= last.end + 1 => last.end = last.end.max(r.end),
                _ => merged.push(r),
            }
        }
        Ok(Self {
            regions: merged,
            series_length,
        })
    }

    pub fn empty(series_length: usize) -> Self {
        Self {
            regions: Vec::new(),
            series_length,
        }
    }

    pub fn from_flags(flags: &[bool]) -> Self {
        regions_from_flags(flags)
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    /// Total number of labeled samples.
    pub fn labeled_count(&self) -> usize {
        self.regions.iter().map(Region::len).sum()
    }

    pub fn contains(&self, index: usize) -> bool {
        // regions are sorted; find the last region starting at or before index
        let pos = self.regions.partition_point(|r| r.start <= index);
        pos > 0 && self.regions[pos - 1].end >= index
    }

    /// The rightmost region.
    pub fn last(&self) -> Option<&Region> {
        self.regions.last()
    }

    pub fn to_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.series_length];
        for r in &self.regions {
            flags[r.start..=r.end].iter_mut().for_each(|f| *f = true);
        }
        flags
    }

    /// Every region widened by `w` and renormalized.
    pub fn dilated(&self, w: usize) -> LabelSet {
        let regions = self.regions.iter().map(|r| r.dilate(w, self.series_length)).collect();
        LabelSet::new(regions, self.series_length).expect("dilation stays in bounds")
    }
}

/// Extracts maximal runs of `true` as regions.
pub fn regions_from_flags(flags: &[bool]) -> LabelSet {
    let mut regions = Vec::new();
    let mut run_start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                regions.push(Region { start: s, end: i - 1 });
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        regions.push(Region {
            start: s,
            end: flags.len() - 1,
        });
    }
    LabelSet {
        regions,
        series_length: flags.len(),
    }
}

/// Where a subsequence score is reported relative to its window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Alignment {
    SubseqStart,
    SubseqMiddle,
    SubseqEnd,
}

impl Alignment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Alignment::SubseqStart => "SUBSEQ_START",
            Alignment::SubseqMiddle => "SUBSEQ_MIDDLE",
            Alignment::SubseqEnd => "SUBSEQ_END",
        }
    }
}

/// A per-position score sequence that carries its own alignment.
///
/// With `subsequence_length == 0` the trace is pointwise and has one score per
/// sample; otherwise it has `n - m + 1` scores, one per subsequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTrace {
    scores: Vec<f64>,
    alignment: Alignment,
    subsequence_length: usize,
}

impl ScoreTrace {
    pub fn new(scores: Vec<f64>, alignment: Alignment, subsequence_length: usize) -> Result<Self, ModelError> {
        if scores.is_empty() {
            return Err(ModelError::EmptyTrace {
                scores: 0,
                sublen: subsequence_length,
            });
        }
        Ok(Self {
            scores,
            alignment,
            subsequence_length,
        })
    }

    pub fn pointwise(scores: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(scores, Alignment::SubseqStart, 0)
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn alignment(&self) -> Alignment {
        self.alignment
    }

    pub fn subsequence_length(&self) -> usize {
        self.subsequence_length
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Length of the series this trace was computed on.
    pub fn series_length(&self) -> usize {
        match self.subsequence_length {
            0 => self.scores.len(),
            m => self.scores.len() + m - 1,
        }
    }

    /// Maps a trace position to the sample index it describes.
    pub fn original_index(&self, pos: usize) -> usize {
        let m = self.subsequence_length;
        if m == 0 {
            return pos;
        }
        match self.alignment {
            Alignment::SubseqStart => pos,
            Alignment::SubseqMiddle => pos + (m - 1) / 2,
            Alignment::SubseqEnd => pos + m - 1,
        }
    }

    /// Position of the largest score, smallest position on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate().skip(1) {
            if s > self.scores[best] {
                best = i;
            }
        }
        best
    }

    pub fn argmax_original(&self) -> usize {
        self.original_index(self.argmax())
    }

    /// Scores laid out in sample coordinates; samples no score maps to are `None`.
    pub fn to_original(&self) -> Vec<Option<f64>> {
        let mut out = vec![None; self.series_length()];
        for (pos, &s) in self.scores.iter().enumerate() {
            out[self.original_index(pos)] = Some(s);
        }
        out
    }
}
