//! Named detectors that produce score traces or single locations.

use std::fmt;
use std::str::FromStr;

use crate::discord::{discord_score, DiscordParams};
use crate::model::{Alignment, ScoreTrace, TimeSeries};
use crate::oneliner::{apply_oneliner, FamilyId, OneLinerSpec};
use crate::scoring::Locator;

/// A detector that scores every position of a series.
pub trait ScoreDetector: Sync {
    fn name(&self) -> String;
    fn score(&self, ts: &TimeSeries) -> Result<ScoreTrace, String>;
}

/// Discord score trace, attributed to the center of each subsequence so the
/// peak points into the anomaly rather than up to `m - 1` samples before it.
#[derive(Debug, Clone, Copy)]
pub struct Discord(pub DiscordParams);

impl ScoreDetector for Discord {
    fn name(&self) -> String {
        format!("discord:m={}:exclusion={}", self.0.sublen, self.0.exclusion)
    }

    fn score(&self, ts: &TimeSeries) -> Result<ScoreTrace, String> {
        let t = discord_score(ts, &self.0).map_err(|e| e.to_string())?;
        ScoreTrace::new(t.scores().to_vec(), Alignment::SubseqMiddle, self.0.sublen).map_err(|e| e.to_string())
    }
}

/// Scores each sample by its value, so the peak is the global maximum.
#[derive(Debug, Clone, Copy)]
pub struct GlobalMax;

impl ScoreDetector for GlobalMax {
    fn name(&self) -> String {
        "global-max".into()
    }

    fn score(&self, ts: &TimeSeries) -> Result<ScoreTrace, String> {
        ScoreTrace::pointwise(ts.values().to_vec()).map_err(|e| e.to_string())
    }
}

/// Always points at the final sample.
#[derive(Debug, Clone, Copy)]
pub struct LastPoint;

impl ScoreDetector for LastPoint {
    fn name(&self) -> String {
        "last-point".into()
    }

    fn score(&self, ts: &TimeSeries) -> Result<ScoreTrace, String> {
        ScoreTrace::pointwise((0..ts.len()).map(|i| i as f64).collect()).map_err(|e| e.to_string())
    }
}

/// Binary trace of a one-liner's flags; the peak is its first flag.
#[derive(Debug, Clone, Copy)]
pub struct OneLiner(pub OneLinerSpec);

impl ScoreDetector for OneLiner {
    fn name(&self) -> String {
        format!("oneliner:{}", self.0.expression())
    }

    fn score(&self, ts: &TimeSeries) -> Result<ScoreTrace, String> {
        let flags = apply_oneliner(&self.0, ts).map_err(|e| e.to_string())?;
        let mut scores = vec![0.0; ts.len()];
        for f in flags {
            scores[f] = 1.0;
        }
        ScoreTrace::pointwise(scores).map_err(|e| e.to_string())
    }
}

/// The detectors selectable by name on the command line.
#[derive(Debug, Clone, Copy)]
pub enum NamedDetector {
    Discord(Discord),
    GlobalMax,
    LastPoint,
    OneLiner(OneLiner),
}

impl NamedDetector {
    pub fn as_score_detector(&self) -> &dyn ScoreDetector {
        match self {
            NamedDetector::Discord(d) => d,
            NamedDetector::GlobalMax => &GlobalMax,
            NamedDetector::LastPoint => &LastPoint,
            NamedDetector::OneLiner(o) => o,
        }
    }
}

impl fmt::Display for NamedDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_score_detector().name())
    }
}

/// Parses `discord[:m=<m>][:exclusion=<e>]`, `global-max`, `last-point`,
/// or `oneliner:<family>[:u=..][:k=..][:c=..][:b=..][:run_len=..]`.
impl FromStr for NamedDetector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(':');
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let kv = |p: &str| -> Result<(String, String), String> {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim().to_string()))
                .ok_or_else(|| format!("expected key=value, got '{p}' in '{s}'"))
        };
        match head.as_str() {
            "discord" => {
                let mut params = DiscordParams::new(64);
                let mut exclusion = None;
                for p in rest {
                    let (k, v) = kv(p)?;
                    let n: usize = v.parse().map_err(|_| format!("'{v}' is not a count in '{s}'"))?;
                    match k.as_str() {
                        "m" | "sublen" => params = DiscordParams::new(n),
                        "exclusion" => exclusion = Some(n),
                        other => return Err(format!("unknown discord parameter '{other}'")),
                    }
                }
                if let Some(e) = exclusion {
                    params = params.with_exclusion(e);
                }
                Ok(NamedDetector::Discord(Discord(params)))
            }
            "global-max" => Ok(NamedDetector::GlobalMax),
            "last-point" => Ok(NamedDetector::LastPoint),
            "oneliner" => {
                let (fam, params) = rest
                    .split_first()
                    .ok_or_else(|| format!("'{s}' names no one-liner family"))?;
                let family: FamilyId = fam.parse()?;
                let spec = parse_oneliner_params(family, params.iter().copied())?;
                Ok(NamedDetector::OneLiner(OneLiner(spec)))
            }
            other => Err(format!("unknown detector '{other}'")),
        }
    }
}

/// Builds a spec from `key=value` items (`u`, `k`, `c`, `b`, `run_len`).
pub fn parse_oneliner_params<'a>(
    family: FamilyId,
    items: impl IntoIterator<Item = &'a str>,
) -> Result<OneLinerSpec, String> {
    let (mut u, mut k, mut c, mut b, mut run_len) = (0u8, 1usize, 0.0f64, 0.0f64, 3usize);
    for item in items {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (key, val) = item
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{item}'"))?;
        let bad = || format!("invalid value '{val}' for '{key}'");
        match key.trim() {
            "u" => u = val.trim().parse().map_err(|_| bad())?,
            "k" => k = val.trim().parse().map_err(|_| bad())?,
            "c" => c = val.trim().parse().map_err(|_| bad())?,
            "b" => b = val.trim().parse().map_err(|_| bad())?,
            "run_len" | "run-len" => run_len = val.trim().parse().map_err(|_| bad())?,
            other => return Err(format!("unknown one-liner parameter '{other}'")),
        }
    }
    if u > 1 {
        return Err(format!("u must be 0 or 1, got {u}"));
    }
    OneLinerSpec::new(family, u, k, c, b, run_len).map_err(|e| e.to_string())
}

/// Turns a score detector into a single-location predictor via the
/// alignment-corrected argmax of its trace.
pub struct ArgmaxLocator<'a>(pub &'a dyn ScoreDetector);

impl Locator for ArgmaxLocator<'_> {
    fn locate(&self, _train: &[f64], series: &TimeSeries) -> Result<usize, String> {
        self.0.score(series).map(|t| t.argmax_original())
    }
}
