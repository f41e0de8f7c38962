//! Exact brute-force discord scores.
//!
//! The score of subsequence `i` is the z-normalized Euclidean distance to its
//! nearest neighbor `j` with `|i - j| >= exclusion`. Pairwise dot products are
//! carried along rows with the usual sliding recurrence, restarted from a
//! direct dot product every [`ROW_BLOCK`] rows. Row blocks have a fixed size
//! so the arithmetic, and therefore the output bits, do not depend on how
//! many worker threads run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::DiscordError;
use crate::model::{Alignment, ScoreTrace, TimeSeries};

const ROW_BLOCK: usize = 64;

/// Candidates whose fast squared distance is within this much of the row
/// minimum are re-measured directly.
const RECHECK_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordParams {
    pub sublen: usize,
    pub exclusion: usize,
    pub znorm_eps: f64,
}

impl DiscordParams {
    /// Subsequence length `m` with the default exclusion zone `m / 2`.
    pub fn new(sublen: usize) -> Self {
        Self {
            sublen,
            exclusion: (sublen / 2).max(1),
            znorm_eps: 1e-8,
        }
    }

    pub fn with_exclusion(mut self, exclusion: usize) -> Self {
        self.exclusion = exclusion;
        self
    }

    pub fn validate(&self, n: usize) -> Result<(), DiscordError> {
        if self.sublen < 4 {
            return Err(DiscordError::SublenTooSmall { sublen: self.sublen });
        }
        if n < 2 * self.sublen {
            return Err(DiscordError::SeriesTooShort {
                len: n,
                sublen: self.sublen,
            });
        }
        if self.exclusion == 0 {
            return Err(DiscordError::ZeroExclusion);
        }
        if !(self.znorm_eps.is_finite() && self.znorm_eps > 0.0) {
            return Err(DiscordError::BadEpsilon(self.znorm_eps));
        }
        Ok(())
    }
}

/// Z-normalizes with the sample standard deviation; sequences whose standard
/// deviation is below `eps` map to all zeros.
pub fn znorm(x: &[f64], eps: f64) -> Vec<f64> {
    let (mean, std) = mean_std(x);
    if std < eps {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| (v - mean) / std).collect()
}

pub(crate) fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Per-window mean and sample std of every length-`m` subsequence.
pub(crate) struct WindowStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// `std < eps`: treated as the zero vector after normalization.
    pub flat: Vec<bool>,
}

impl WindowStats {
    pub fn new(x: &[f64], m: usize, eps: f64) -> Self {
        let count = x.len() - m + 1;
        let (mean, std): (Vec<f64>, Vec<f64>) = (0..count).into_par_iter().map(|i| mean_std(&x[i..i + m])).unzip();
        let flat = std.iter().map(|&s| s < eps).collect();
        Self { mean, std, flat }
    }

    /// Direct z-normalized distance between windows `i` and `j`.
    pub fn distance(&self, x: &[f64], m: usize, i: usize, j: usize) -> f64 {
        match (self.flat[i], self.flat[j]) {
            (true, true) => 0.0,
            (true, false) | (false, true) => ((m - 1) as f64).sqrt(),
            (false, false) => {
                let (mi, si) = (self.mean[i], self.std[i]);
                let (mj, sj) = (self.mean[j], self.std[j]);
                x[i..i + m]
                    .iter()
                    .zip(&x[j..j + m])
                    .map(|(a, b)| {
                        let d = (a - mi) / si - (b - mj) / sj;
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }
}

/// Discord score trace, one value per subsequence start.
pub fn discord_score(ts: &TimeSeries, p: &DiscordParams) -> Result<ScoreTrace, DiscordError> {
    let n = ts.len();
    p.validate(n)?;
    let m = p.sublen;
    let global_mean = ts.values().iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = ts.values().iter().map(|v| v - global_mean).collect();
    let stats = WindowStats::new(&x, m, p.znorm_eps);
    let count = n - m + 1;

    let mut scores = vec![0.0; count];
    scores.par_chunks_mut(ROW_BLOCK).enumerate().for_each(|(block, out)| {
        let first = block * ROW_BLOCK;
        score_rows(&x, m, p.exclusion, &stats, first, out);
    });
    Ok(ScoreTrace::new(scores, Alignment::SubseqStart, m).expect("non-empty trace"))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn score_rows(x: &[f64], m: usize, exclusion: usize, stats: &WindowStats, first: usize, out: &mut [f64]) {
    let count = x.len() - m + 1;
    let mf = m as f64;
    // flat windows get a zero inverse std and an infinite penalty so the
    // vectorized pass skips them; they are handled through `flat_prefix`
    let inv: Vec<f64> = (0..count)
        .map(|j| if stats.flat[j] { 0.0 } else { 1.0 / stats.std[j] })
        .collect();
    let penalty: Vec<f64> = stats
        .flat
        .iter()
        .map(|&f| if f { f64::INFINITY } else { 0.0 })
        .collect();
    let mut flat_prefix = vec![0usize; count + 1];
    for j in 0..count {
        flat_prefix[j + 1] = flat_prefix[j] + usize::from(stats.flat[j]);
    }
    let flats_in = |lo: usize, hi: usize| lo < hi && flat_prefix[hi] > flat_prefix[lo];

    let mut qt: Vec<f64> = (0..count).map(|j| dot(&x[first..first + m], &x[j..j + m])).collect();
    let mut next = vec![0.0; count];
    let mut d2 = vec![0.0; count];
    let mut near: Vec<usize> = Vec::new();
    for (offset, slot) in out.iter_mut().enumerate() {
        let i = first + offset;
        if offset > 0 {
            let (drop, add) = (x[i - 1], x[i + m - 1]);
            next[0] = dot(&x[i..i + m], &x[..m]);
            for j in 1..count {
                next[j] = qt[j - 1] - drop * x[j - 1] + add * x[j + m - 1];
            }
            std::mem::swap(&mut qt, &mut next);
        }

        let left = i.saturating_sub(exclusion - 1);
        let right = (i + exclusion).min(count);
        let ranges = [(0, left), (right, count)];
        let mut best = f64::INFINITY;
        if stats.flat[i] {
            for &(lo, hi) in &ranges {
                for (d, &flat) in d2[lo..hi].iter_mut().zip(&stats.flat[lo..hi]) {
                    *d = if flat { 0.0 } else { mf - 1.0 };
                    best = best.min(*d);
                }
            }
        } else {
            let (mi, si) = (mf * stats.mean[i], inv[i]);
            for &(lo, hi) in &ranges {
                for j in lo..hi {
                    let corr = (qt[j] - mi * stats.mean[j]) * si * inv[j];
                    d2[j] = (2.0 * (mf - 1.0) - 2.0 * corr).max(0.0) + penalty[j];
                }
                best = d2[lo..hi].iter().copied().fold(best, f64::min);
            }
            if ranges.iter().any(|&(lo, hi)| flats_in(lo, hi)) {
                best = best.min(mf - 1.0);
                for &(lo, hi) in &ranges {
                    for (d, &flat) in d2[lo..hi].iter_mut().zip(&stats.flat[lo..hi]) {
                        if flat {
                            *d = mf - 1.0;
                        }
                    }
                }
            }
        }
        near.clear();
        for &(lo, hi) in &ranges {
            near.extend((lo..hi).filter(|&j| d2[j] <= best + RECHECK_SLACK));
        }
        *slot = near
            .iter()
            .map(|&j| stats.distance(x, m, i, j))
            .fold(f64::INFINITY, f64::min);
    }
}

/// Greedy top-`k` peaks at least `exclusion` positions apart; ties go to the
/// smaller position. Positions are in trace coordinates.
pub fn top_k_discords(trace: &ScoreTrace, k: usize, exclusion: usize) -> Vec<usize> {
    let s = trace.scores();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    for pos in order {
        if picked.len() == k {
            break;
        }
        if picked.iter().all(|&q| q.abs_diff(pos) >= exclusion) {
            picked.push(pos);
        }
    }
    picked
}
