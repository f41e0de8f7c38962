//! Seeded synthetic series exhibiting each benchmark flaw.
//!
//! Every generator is a pure function of its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::model::{LabelSet, Region, TimeSeries};
use crate::perturb::{inject_anomaly, InjectionKind, InjectionSpec, Placement};
use crate::scoring::UcrMeta;

/// A labeled fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub series: TimeSeries,
    pub labels: LabelSet,
}

impl Fixture {
    fn new(series: TimeSeries, regions: Vec<Region>) -> Self {
        let labels = LabelSet::new(regions, series.len()).expect("fixture regions are in bounds");
        Self { series, labels }
    }

    pub fn region(&self) -> Region {
        self.labels.regions()[0]
    }
}

/// Sine with a seeded period in `[40, 80)` plus Gaussian noise.
pub fn noisy_sine(n: usize, noise: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let period = rng.random_range(40.0..80.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let normal = Normal::new(0.0, noise).expect("noise is finite and non-negative");
    (0..n)
        .map(|i| (std::f64::consts::TAU * i as f64 / period + phase).sin() + normal.sample(rng))
        .collect()
}

fn inject(name: String, values: Vec<f64>, kind: InjectionKind, at: usize, seed: u64) -> Fixture {
    let clean = TimeSeries::new(name, values).expect("generated values are finite");
    let (series, region) = inject_anomaly(
        &clean,
        &InjectionSpec {
            kind,
            location: Placement::At(at),
            seed,
        },
    )
    .expect("fixture injection is in bounds");
    Fixture::new(series, vec![region])
}

/// A 10-sigma spike in a smooth noisy sine.
pub fn spike(seed: u64, n: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = noisy_sine(n, 0.02, &mut rng);
    let at = rng.random_range(n / 4..n - n / 8);
    inject(
        format!("spike-{seed}"),
        v,
        InjectionKind::Spike { magnitude: 10.0 },
        at,
        seed,
    )
}

/// A 20-sample drop to far below the signal.
pub fn dropout(seed: u64, n: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = noisy_sine(n, 0.02, &mut rng);
    let at = rng.random_range(n / 4..n - n / 8 - 20);
    inject(
        format!("dropout-{seed}"),
        v,
        InjectionKind::Dropout {
            length: 20,
            value: None,
        },
        at,
        seed,
    )
}

/// A 50-sample freeze in a noisy sine: no diff threshold can isolate it.
pub fn freeze(seed: u64, n: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = noisy_sine(n, 0.05, &mut rng);
    let at = rng.random_range(n / 4..n - n / 8 - 50);
    inject(
        format!("freeze-{seed}"),
        v,
        InjectionKind::Freeze { length: 50 },
        at,
        seed,
    )
}

/// One labeled region covering between 1/3 and 1/2 of the series.
pub fn high_density(seed: u64, n: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = noisy_sine(n, 0.05, &mut rng);
    let len = rng.random_range(n.div_ceil(3)..n / 2);
    let start = rng.random_range(0..n - len);
    v[start..start + len].iter_mut().for_each(|x| *x += 3.0);
    let series = TimeSeries::new(format!("dense-{seed}"), v).expect("finite");
    Fixture::new(series, vec![Region::new(start, start + len - 1).expect("ordered")])
}

/// A distinctive bump shape of length `len`.
fn bump(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let height = rng.random_range(2.0..3.0);
    let skew = rng.random_range(0.2..0.8);
    (0..len)
        .map(|i| {
            let t = i as f64 / (len - 1) as f64;
            let x = if t < skew { t / skew } else { (1.0 - t) / (1.0 - skew) };
            height * x * x
        })
        .collect()
}

/// A labeled bump plus an exact, unlabeled copy elsewhere.
pub fn twin(seed: u64, n: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = noisy_sine(n, 0.1, &mut rng);
    let len = 40;
    let shape = bump(len, &mut rng);
    let a = rng.random_range(n / 8..n / 2 - len - 100);
    let b = rng.random_range(n / 2 + 100..n - n / 8 - len);
    let (labeled, copy) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
    for i in 0..len {
        v[labeled + i] += shape[i];
    }
    for i in 0..len {
        v[copy + i] = v[labeled + i];
    }
    // the copy must match beyond the bump too, or windows around it differ
    let pad = 64;
    for i in 1..=pad {
        if labeled >= i && copy >= i {
            v[copy - i] = v[labeled - i];
        }
        if labeled + len - 1 + i < n && copy + len - 1 + i < n {
            v[copy + len - 1 + i] = v[labeled + len - 1 + i];
        }
    }
    let series = TimeSeries::new(format!("twin-{seed}"), v).expect("finite");
    Fixture::new(series, vec![Region::new(labeled, labeled + len - 1).expect("ordered")])
}

/// A single labeled bump with no copy.
pub fn unique(seed: u64, n: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = noisy_sine(n, 0.1, &mut rng);
    let len = 40;
    let shape = bump(len, &mut rng);
    let at = rng.random_range(n / 8..n - n / 8 - len);
    for i in 0..len {
        v[at + i] += shape[i];
    }
    let series = TimeSeries::new(format!("unique-{seed}"), v).expect("finite");
    Fixture::new(series, vec![Region::new(at, at + len - 1).expect("ordered")])
}

/// A UCR-style series with a train prefix and one labeled region.
#[derive(Debug, Clone, PartialEq)]
pub struct UcrFixture {
    pub series: TimeSeries,
    pub meta: UcrMeta,
}

/// `count` series of which the first `terminal` have their anomaly in the
/// final 1% of the series and the rest have it uniformly in the test part.
/// Terminal anomalies are hit by a last-point predictor at slop 100; the
/// others are at least 500 samples from the end and are missed.
pub fn placement_corpus(seed: u64, count: usize, terminal: usize, n: usize) -> Vec<UcrFixture> {
    assert!(n >= 2000, "placement fixtures need room for a train prefix");
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            let v = noisy_sine(n, 0.05, &mut rng);
            let train_end = n / 4;
            let len = rng.random_range(5..20);
            let begin = if i < terminal {
                rng.random_range(n - n / 100..n - len)
            } else {
                rng.random_range(train_end + 1..n - 500 - len)
            };
            let meta = UcrMeta {
                dataset_name: format!("place{seed}x{i}"),
                train_end,
                begin,
                end: begin + len - 1,
            };
            let series = TimeSeries::new(meta.file_name(), v)
                .and_then(|t| t.with_train_end(train_end))
                .expect("finite with a valid prefix");
            UcrFixture { series, meta }
        })
        .collect()
}
