//! Seeded perturbations, anomaly injection and invariance probes.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, so a `(series, parameters, seed)` triple always yields
//! the same bits.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::detectors::ScoreDetector;
use crate::discord::mean_std;
use crate::error::PerturbError;
use crate::model::{Region, TimeSeries};
use crate::numfmt::sig9;
use crate::scoring::score_region;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Perturbation {
    GaussianNoise {
        sigma: f64,
    },
    AmplitudeScale {
        factor: f64,
    },
    Offset {
        offset: f64,
    },
    /// Adds `slope * i` to sample `i`.
    LinearTrend {
        slope: f64,
    },
    /// Adds a Gaussian random walk with the given step deviation.
    WanderingBaseline {
        step_sigma: f64,
    },
    /// Resamples to `round(n * factor)` samples by linear interpolation.
    UniformScaling {
        factor: f64,
    },
    Dropout {
        region: Region,
        value: f64,
    },
    ConstantFreeze {
        region: Region,
    },
}

fn bad(msg: impl Into<String>) -> PerturbError {
    PerturbError::BadParameter(msg.into())
}

impl Perturbation {
    pub fn validate(&self, n: usize) -> Result<(), PerturbError> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(bad(format!("{name} must be finite, got {v}")))
            }
        };
        let in_bounds = |r: &Region| {
            if r.start <= r.end && r.end < n {
                Ok(())
            } else {
                Err(PerturbError::RegionOutOfBounds {
                    start: r.start,
                    end: r.end,
                    len: n,
                })
            }
        };
        match *self {
            Perturbation::GaussianNoise { sigma: s } | Perturbation::WanderingBaseline { step_sigma: s } => {
                finite("sigma", s)?;
                if s < 0.0 {
                    return Err(bad(format!("sigma must be non-negative, got {s}")));
                }
            }
            Perturbation::AmplitudeScale { factor } | Perturbation::UniformScaling { factor } => {
                finite("factor", factor)?;
                if factor <= 0.0 {
                    return Err(bad(format!("scale factor must be positive, got {factor}")));
                }
                if matches!(self, Perturbation::UniformScaling { .. }) && scaled_len(n, factor) < 2 {
                    return Err(bad(format!("uniform scaling by {factor} leaves fewer than 2 samples")));
                }
            }
            Perturbation::Offset { offset } => finite("offset", offset)?,
            Perturbation::LinearTrend { slope } => finite("slope", slope)?,
            Perturbation::Dropout { region, value } => {
                finite("value", value)?;
                in_bounds(&region)?;
            }
            Perturbation::ConstantFreeze { region } => in_bounds(&region)?,
        }
        Ok(())
    }

    /// Where a region of the original series ends up after this perturbation.
    pub fn map_region(&self, r: Region, n: usize) -> Region {
        match *self {
            Perturbation::UniformScaling { factor } => {
                let m = scaled_len(n, factor);
                let ratio = (m - 1) as f64 / (n - 1) as f64;
                let map = |i: usize| ((i as f64 * ratio).round() as usize).min(m - 1);
                Region {
                    start: map(r.start),
                    end: map(r.end),
                }
            }
            _ => r,
        }
    }
}

fn scaled_len(n: usize, factor: f64) -> usize {
    (n as f64 * factor).round() as usize
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Perturbation::GaussianNoise { sigma } => write!(f, "gaussian-noise:sigma={}", sig9(sigma)),
            Perturbation::AmplitudeScale { factor } => write!(f, "amplitude-scale:factor={}", sig9(factor)),
            Perturbation::Offset { offset } => write!(f, "offset:offset={}", sig9(offset)),
            Perturbation::LinearTrend { slope } => write!(f, "linear-trend:slope={}", sig9(slope)),
            Perturbation::WanderingBaseline { step_sigma } => {
                write!(f, "wandering-baseline:step={}", sig9(step_sigma))
            }
            Perturbation::UniformScaling { factor } => write!(f, "uniform-scaling:factor={}", sig9(factor)),
            Perturbation::Dropout { region, value } => write!(
                f,
                "dropout:start={}:end={}:value={}",
                region.start,
                region.end,
                sig9(value)
            ),
            Perturbation::ConstantFreeze { region } => {
                write!(f, "constant-freeze:start={}:end={}", region.start, region.end)
            }
        }
    }
}

/// Parses `name[:param]*`, each param either `key=value` or a bare value
/// taken positionally, e.g. `gaussian-noise:sigma=0.5`, `amplitude-scale:3`,
/// `dropout:start=10:end=20:value=-9999`.
impl FromStr for Perturbation {
    type Err = PerturbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut named: Vec<(String, String)> = Vec::new();
        let mut positional: Vec<String> = Vec::new();
        for p in parts {
            match p.split_once('=') {
                Some((k, v)) => named.push((k.trim().to_ascii_lowercase(), v.trim().to_string())),
                None => positional.push(p.trim().to_string()),
            }
        }
        let mut pos = positional.into_iter();
        let mut take = |keys: &[&str], default: Option<&str>| -> Result<String, PerturbError> {
            if let Some((_, v)) = named.iter().find(|(k, _)| keys.contains(&k.as_str())) {
                return Ok(v.clone());
            }
            pos.next()
                .or_else(|| default.map(str::to_string))
                .ok_or_else(|| bad(format!("'{s}' is missing parameter '{}'", keys[0])))
        };
        let num = |v: String| -> Result<f64, PerturbError> {
            v.parse::<f64>()
                .map_err(|_| bad(format!("'{v}' is not a number in '{s}'")))
        };
        let idx = |v: String| -> Result<usize, PerturbError> {
            v.parse::<usize>()
                .map_err(|_| bad(format!("'{v}' is not an index in '{s}'")))
        };
        let p = match name.as_str() {
            "gaussian-noise" | "noise" => Perturbation::GaussianNoise {
                sigma: num(take(&["sigma"], None)?)?,
            },
            "amplitude-scale" | "scale" => Perturbation::AmplitudeScale {
                factor: num(take(&["factor", "a"], None)?)?,
            },
            "offset" => Perturbation::Offset {
                offset: num(take(&["offset", "b0", "b"], None)?)?,
            },
            "linear-trend" | "trend" => Perturbation::LinearTrend {
                slope: num(take(&["slope"], None)?)?,
            },
            "wandering-baseline" => Perturbation::WanderingBaseline {
                step_sigma: num(take(&["step", "step_sigma", "sigma"], None)?)?,
            },
            "uniform-scaling" => Perturbation::UniformScaling {
                factor: num(take(&["factor"], None)?)?,
            },
            "dropout" | "occlusion" => {
                let start = idx(take(&["start"], None)?)?;
                let end = idx(take(&["end"], None)?)?;
                let value = num(take(&["value"], Some("0"))?)?;
                Perturbation::Dropout {
                    region: Region::new(start, end)?,
                    value,
                }
            }
            "constant-freeze" | "freeze" => {
                let start = idx(take(&["start"], None)?)?;
                let end = idx(take(&["end"], None)?)?;
                Perturbation::ConstantFreeze {
                    region: Region::new(start, end)?,
                }
            }
            other => return Err(bad(format!("unknown perturbation '{other}'"))),
        };
        Ok(p)
    }
}

pub fn apply_perturbation(ts: &TimeSeries, p: &Perturbation, seed: u64) -> Result<TimeSeries, PerturbError> {
    let n = ts.len();
    p.validate(n)?;
    let x = ts.values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out: Vec<f64> = match *p {
        Perturbation::GaussianNoise { sigma } => {
            if sigma == 0.0 {
                x.to_vec()
            } else {
                let normal = Normal::new(0.0, sigma).map_err(|e| bad(e.to_string()))?;
                x.iter().map(|v| v + normal.sample(&mut rng)).collect()
            }
        }
        Perturbation::AmplitudeScale { factor } => x.iter().map(|v| v * factor).collect(),
        Perturbation::Offset { offset } => x.iter().map(|v| v + offset).collect(),
        Perturbation::LinearTrend { slope } => x.iter().enumerate().map(|(i, v)| v + slope * i as f64).collect(),
        Perturbation::WanderingBaseline { step_sigma } => {
            if step_sigma == 0.0 {
                x.to_vec()
            } else {
                let normal = Normal::new(0.0, step_sigma).map_err(|e| bad(e.to_string()))?;
                let mut level = 0.0;
                x.iter()
                    .map(|v| {
                        level += normal.sample(&mut rng);
                        v + level
                    })
                    .collect()
            }
        }
        Perturbation::UniformScaling { factor } => {
            let m = scaled_len(n, factor);
            let step = (n - 1) as f64 / (m - 1) as f64;
            (0..m)
                .map(|i| {
                    let t = i as f64 * step;
                    let lo = (t.floor() as usize).min(n - 1);
                    let hi = (lo + 1).min(n - 1);
                    let frac = t - lo as f64;
                    x[lo] + (x[hi] - x[lo]) * frac
                })
                .collect()
        }
        Perturbation::Dropout { region, value } => {
            let mut v = x.to_vec();
            v[region.start..=region.end].iter_mut().for_each(|s| *s = value);
            v
        }
        Perturbation::ConstantFreeze { region } => {
            let mut v = x.to_vec();
            let held = v[region.start];
            v[region.start..=region.end].iter_mut().for_each(|s| *s = held);
            v
        }
    };
    Ok(ts.with_values(out)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InjectionKind {
    /// Moves one sample `magnitude` standard deviations (of the whole series)
    /// past the extreme of itself and its two neighbours; negative values
    /// dip below the minimum.
    Spike { magnitude: f64 },
    /// Overwrites `length` samples with `value`, or with `min - 10 * std`.
    Dropout { length: usize, value: Option<f64> },
    /// Holds the first sample of a `length`-sample window constant.
    Freeze { length: usize },
    /// Replaces one period-long window with the window starting at `donor`,
    /// shifted so the donor's first sample equals the replaced one.
    CycleSplice { donor: usize, period: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Random,
    At(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub kind: InjectionKind,
    pub location: Placement,
    pub seed: u64,
}

/// Lag in `[4, n/4]` with the highest autocorrelation; among lags scoring
/// within 5% of the best, the shortest wins so harmonics of the period lose.
pub fn estimate_period(x: &[f64]) -> Option<usize> {
    let max_lag = (x.len() / 4).min(x.len().saturating_sub(3));
    if max_lag < 4 {
        return None;
    }
    let acf: Vec<(usize, f64)> = (4..=max_lag)
        .map(|lag| (lag, pearson(&x[..x.len() - lag], &x[lag..])))
        .collect();
    let best = acf.iter().map(|&(_, r)| r).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() || best <= 0.0 {
        return None;
    }
    let is_peak = |i: usize| {
        let r = acf[i].1;
        (i == 0 || acf[i - 1].1 <= r) && (i + 1 == acf.len() || acf[i + 1].1 <= r)
    };
    (0..acf.len())
        .find(|&i| is_peak(i) && acf[i].1 >= 0.95 * best)
        .map(|i| acf[i].0)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    if sa == 0.0 || sb == 0.0 {
        return 0.0;
    }
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64;
    cov / (sa * sb)
}

/// Inserts one anomaly and returns the modified series with its exact
/// ground-truth region.
pub fn inject_anomaly(clean: &TimeSeries, spec: &InjectionSpec) -> Result<(TimeSeries, Region), PerturbError> {
    let n = clean.len();
    let x = clean.values();
    let (_, std) = mean_std(x);
    let scale = if std > 0.0 { std } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let first_allowed = clean.train_end().unwrap_or(0);

    let (length, period) = match spec.kind {
        InjectionKind::Spike { magnitude } => {
            if !magnitude.is_finite() {
                return Err(bad("spike magnitude must be finite"));
            }
            (1, None)
        }
        InjectionKind::Dropout { length, .. } | InjectionKind::Freeze { length } => {
            if length == 0 {
                return Err(bad("anomaly length must be positive"));
            }
            (length, None)
        }
        InjectionKind::CycleSplice { donor, period } => {
            let source = if clean.train().len() >= 32 { clean.train() } else { x };
            let p = match period {
                Some(p) => p,
                None => estimate_period(source).ok_or_else(|| bad("could not estimate a period"))?,
            };
            if p == 0 {
                return Err(bad("period must be positive"));
            }
            if p > n / 4 {
                return Err(PerturbError::PeriodTooLong { period: p, len: n });
            }
            if donor + p > n {
                return Err(PerturbError::RegionOutOfBounds {
                    start: donor,
                    end: donor + p - 1,
                    len: n,
                });
            }
            (p, Some((donor, p)))
        }
    };
    if length > n {
        return Err(PerturbError::SeriesTooShort { len: n });
    }

    let overlaps_donor = |t: usize| period.is_some_and(|(d, p)| t < d + p && d < t + p);
    let start = match spec.location {
        Placement::At(t) => {
            if t + length > n {
                return Err(PerturbError::RegionOutOfBounds {
                    start: t,
                    end: t + length - 1,
                    len: n,
                });
            }
            if let Some((d, p)) = period.filter(|_| overlaps_donor(t)) {
                return Err(PerturbError::DonorOverlap {
                    donor: d,
                    donor_end: d + p - 1,
                    target: t,
                    target_end: t + p - 1,
                });
            }
            t
        }
        Placement::Random => {
            let lo = if first_allowed + length <= n { first_allowed } else { 0 };
            let choices: Vec<usize> = (lo..=n - length).filter(|&t| !overlaps_donor(t)).collect();
            if choices.is_empty() {
                return Err(PerturbError::SeriesTooShort { len: n });
            }
            choices[rng.random_range(0..choices.len())]
        }
    };
    let region = Region {
        start,
        end: start + length - 1,
    };

    let mut v = x.to_vec();
    match spec.kind {
        InjectionKind::Spike { magnitude } => {
            let near = x[start.saturating_sub(1)..(start + 2).min(n)].iter().copied();
            let local = if magnitude >= 0.0 {
                near.fold(f64::NEG_INFINITY, f64::max)
            } else {
                near.fold(f64::INFINITY, f64::min)
            };
            v[start] = local + magnitude * scale;
        }
        InjectionKind::Dropout { value, .. } => {
            let min = x.iter().copied().fold(f64::INFINITY, f64::min);
            let fill = value.unwrap_or(min - 10.0 * scale);
            v[region.start..=region.end].iter_mut().for_each(|s| *s = fill);
        }
        InjectionKind::Freeze { .. } => {
            let held = x[start];
            v[region.start..=region.end].iter_mut().for_each(|s| *s = held);
        }
        InjectionKind::CycleSplice { .. } => {
            let (donor, p) = period.expect("splice has a period");
            let shift = x[start] - x[donor];
            for i in 0..p {
                v[start + i] = x[donor + i] + shift;
            }
        }
    }
    Ok((clean.with_values(v)?, region))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub perturbation: String,
    pub argmax_before: usize,
    pub argmax_after: Option<usize>,
    pub hit_before: bool,
    pub hit_after: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub detector: String,
    pub truth: Region,
    pub slop: usize,
    pub seed: u64,
    pub entries: Vec<ProbeEntry>,
}

/// Scores the series before and after each perturbation and checks whether
/// the detector's peak stays within `slop` of the truth region.
pub fn invariance_probe(
    detector: &dyn ScoreDetector,
    ts: &TimeSeries,
    truth: Region,
    perturbations: &[Perturbation],
    slop: usize,
    seed: u64,
) -> Result<ProbeReport, PerturbError> {
    if truth.end >= ts.len() {
        return Err(PerturbError::RegionOutOfBounds {
            start: truth.start,
            end: truth.end,
            len: ts.len(),
        });
    }
    let before = detector
        .score(ts)
        .map_err(|e| bad(format!("detector failed on the unperturbed series: {e}")))?;
    let argmax_before = before.argmax_original();
    let hit_before = score_region(argmax_before, truth, slop);

    let entries = perturbations
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let outcome = apply_perturbation(ts, p, seed.wrapping_add(i as u64))
                .map_err(|e| e.to_string())
                .and_then(|perturbed| {
                    let moved = p.map_region(truth, ts.len());
                    detector.score(&perturbed).map(|trace| {
                        let at = trace.argmax_original();
                        (at, score_region(at, moved, slop))
                    })
                });
            let (argmax_after, hit_after, error) = match outcome {
                Ok((at, hit)) => (Some(at), Some(hit), None),
                Err(e) => (None, None, Some(e)),
            };
            ProbeEntry {
                perturbation: p.to_string(),
                argmax_before,
                argmax_after,
                hit_before,
                hit_after,
                error,
            }
        })
        .collect();
    Ok(ProbeReport {
        detector: detector.name(),
        truth,
        slop,
        seed,
        entries,
    })
}
