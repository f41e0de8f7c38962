//! Acceptance criteria. Each test prints one `ACCEPTANCE` line with its
//! verdict and the measured numbers, then asserts.
//!
//! Criteria 1 and 6 need data that cannot be redistributed: set
//! `YAHOO_S5_DIR` to the directory holding `A1Benchmark` .. `A4Benchmark`
//! and `NAB_TAXI_CSV` to `realKnownCause/nyc_taxi.csv`. Without them those
//! criteria print SKIP.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsaudit_core::audit::{audit_series, AuditConfig};
use tsaudit_core::detectors::{ArgmaxLocator, LastPoint};
use tsaudit_core::diagnostics::{
    density_flags, density_metrics, label_consistency_scan, position_bias, ConsistencyParams, FindingKind,
    FlagThresholds, FlawFlag,
};
use tsaudit_core::discord::{discord_score, top_k_discords, DiscordParams};
use tsaudit_core::fixtures::{self, noisy_sine, Fixture};
use tsaudit_core::ingest::{load_series, write_sidecar_series, SeriesFormat};
use tsaudit_core::model::regions_from_flags;
use tsaudit_core::oneliner::{
    apply_oneliner, audit_triviality, brute_force_search, moving_mean, moving_std, FamilyId, SearchGrid, SolveCriterion,
};
use tsaudit_core::perturb::{inject_anomaly, InjectionKind, InjectionSpec, Placement};
use tsaudit_core::plot::write_plot_bundle;
use tsaudit_core::scoring::{evaluate_detector, parse_ucr_name, score_region, ScoringConfig, UcrMeta};
use tsaudit_core::{LabelSet, Region, TimeSeries};

fn report(criterion: &str, pass: Option<bool>, detail: &str) {
    let verdict = match pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "SKIP",
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "ACCEPTANCE {criterion}: {verdict} ({detail})");
}

// Independent oracles.

fn window(i: usize, k: usize, n: usize) -> (usize, usize) {
    let lo = i.saturating_sub((k - 1) / 2);
    let hi = (i + k / 2).min(n - 1);
    (lo, hi)
}

fn oracle_mean_std(x: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    (0..n)
        .map(|i| {
            let (lo, hi) = window(i, k, n);
            let w = &x[lo..=hi];
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            let std = if w.len() == 1 {
                0.0
            } else {
                (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (w.len() - 1) as f64).sqrt()
            };
            (mean, std)
        })
        .unzip()
}

fn oracle_znorm(w: &[f64]) -> Vec<f64> {
    let m = w.len() as f64;
    let mean = w.iter().sum::<f64>() / m;
    let std = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    if std < 1e-8 {
        vec![0.0; w.len()]
    } else {
        w.iter().map(|v| (v - mean) / std).collect()
    }
}

fn oracle_discord(x: &[f64], m: usize, exclusion: usize) -> Vec<f64> {
    let count = x.len() - m + 1;
    let z: Vec<Vec<f64>> = (0..count).map(|i| oracle_znorm(&x[i..i + m])).collect();
    (0..count)
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in 0..count {
                if i.abs_diff(j) < exclusion {
                    continue;
                }
                let d: f64 = z[i].iter().zip(&z[j]).map(|(a, b)| (a - b).powi(2)).sum();
                best = best.min(d.sqrt());
            }
            best
        })
        .collect()
}

/// Perfect detection under point tolerance `w`, by direct scan.
fn oracle_solved(flags: &[usize], labels: &[bool], w: usize) -> bool {
    let n = labels.len();
    let near = |i: usize, want: &dyn Fn(usize) -> bool| (i.saturating_sub(w)..=(i + w).min(n - 1)).any(want);
    let flag_set: Vec<bool> = {
        let mut f = vec![false; n];
        flags.iter().for_each(|&i| f[i] = true);
        f
    };
    let every_flag_near_label = flags.iter().all(|&i| near(i, &|j| labels[j]));
    let mut every_region_hit = true;
    let mut i = 0;
    while i < n {
        if labels[i] {
            let s = i;
            while i + 1 < n && labels[i + 1] {
                i += 1;
            }
            let lo = s.saturating_sub(w);
            let hi = (i + w).min(n - 1);
            every_region_hit &= (lo..=hi).any(|j| flag_set[j]);
        }
        i += 1;
    }
    every_flag_near_label && every_region_hit
}

/// Whether any threshold `b` separates the labels for `|diff|` or `diff`.
/// Flag sets of `x > b` only change at data values, so trying `b` just
/// below the minimum and at every value covers all of them.
fn oracle_threshold_exists(v: &[f64], labels: &[bool], w: usize) -> bool {
    let d: Vec<f64> = v.windows(2).map(|p| p[1] - p[0]).collect();
    let a: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    [d, a].iter().any(|x| {
        let mut bs: Vec<f64> = x.clone();
        bs.push(x.iter().copied().fold(f64::INFINITY, f64::min) - 1.0);
        bs.iter().any(|&b| {
            let flags: Vec<usize> = (0..x.len()).filter(|&i| x[i] > b).map(|i| i + 1).collect();
            !flags.is_empty() && oracle_solved(&flags, labels, w)
        })
    })
}

// 1

fn yahoo_corpus(root: &Path) -> BTreeMap<String, Vec<(TimeSeries, LabelSet)>> {
    let mut out = BTreeMap::new();
    for group in ["A1Benchmark", "A2Benchmark", "A3Benchmark", "A4Benchmark"] {
        let dir = root.join(group);
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
            .map(|e| e.unwrap().path())
            .filter(|p| {
                let name = p.file_name().unwrap().to_string_lossy();
                name.ends_with(".csv") && !name.contains("_all")
            })
            .collect();
        files.sort();
        let series = files
            .iter()
            .map(|p| {
                let l = load_series(p, SeriesFormat::CsvValueLabel).unwrap_or_else(|e| panic!("{e}"));
                let n = l.series.len();
                (l.series, l.labels.unwrap_or_else(|| LabelSet::empty(n)))
            })
            .collect();
        out.insert(group.to_string(), series);
    }
    out
}

#[test]
fn criterion_1_yahoo_table_reproduction() {
    let Some(root) = std::env::var_os("YAHOO_S5_DIR").map(PathBuf::from) else {
        report("1 Yahoo S5 triviality", None, "YAHOO_S5_DIR not set");
        return;
    };
    let started = Instant::now();
    let corpus = yahoo_corpus(&root);
    let published = [
        ("A1Benchmark", 44, 67),
        ("A2Benchmark", 97, 100),
        ("A3Benchmark", 98, 100),
        ("A4Benchmark", 77, 100),
    ];
    let mut best = (0.0, 0);
    let mut at_best = BTreeMap::new();
    for w in [0, 1, 2] {
        let mut solved_all = 0;
        let mut total_all = 0;
        let mut per = BTreeMap::new();
        for (group, items) in &corpus {
            let r = audit_triviality(
                items,
                &FamilyId::SIMPLIFIED,
                &SearchGrid::default(),
                SolveCriterion { w },
            )
            .unwrap();
            solved_all += r.solved;
            total_all += r.total;
            per.insert(group.clone(), (r.solved, r.total));
        }
        let frac = solved_all as f64 / total_all as f64;
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "w={w}: {solved_all}/{total_all} = {frac:.3}");
        for (g, s, t) in published {
            let (ours, total) = per.get(g).copied().unwrap_or((0, 0));
            let _ = writeln!(out, "  {g}: ours {ours}/{total}, published {s}/{t}");
        }
        if frac > best.0 {
            best = (frac, w);
            at_best = per;
        }
    }
    let frac_of = |g: &str| at_best.get(g).map_or(0.0, |&(s, t)| s as f64 / t.max(1) as f64);
    let pass = best.0 >= 0.80 && frac_of("A2Benchmark") >= 0.90 && frac_of("A3Benchmark") >= 0.90;
    report(
        "1 Yahoo S5 triviality",
        Some(pass),
        &format!(
            "best w={} solved {:.3}, A2 {:.3}, A3 {:.3}, {:.0}s",
            best.1,
            best.0,
            frac_of("A2Benchmark"),
            frac_of("A3Benchmark"),
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}

// 2

#[test]
fn criterion_2_flaw_fixture_suite() {
    let crit = SolveCriterion::default();
    let grid = SearchGrid::default();
    type Make = fn(u64, usize) -> Fixture;
    let kinds: [(&str, Make); 3] = [
        ("spike", fixtures::spike),
        ("dropout", fixtures::dropout),
        ("freeze", fixtures::freeze),
    ];
    let mut solved_rates = Vec::new();
    for (name, make) in kinds {
        let solved = (0..60u64)
            .filter(|&s| {
                let f = make(s, 1000);
                brute_force_search(&f.series, &f.labels, &FamilyId::SEARCH_ORDER, &grid, crit)
                    .unwrap()
                    .is_some()
            })
            .count();
        solved_rates.push((name, solved as f64 / 60.0));
    }
    let a = solved_rates.iter().all(|&(_, r)| r >= 0.95);

    let dense_hits = (0..60u64)
        .filter(|&s| {
            let f = fixtures::high_density(s, 900);
            density_flags(&density_metrics(&f.labels), &FlagThresholds::default()).contains(&FlawFlag::HighDensity)
        })
        .count();
    let b = dense_hits == 60;

    let labels_of = |c: &[fixtures::UcrFixture]| -> Vec<LabelSet> {
        c.iter()
            .map(|f| LabelSet::new(vec![f.meta.region()], f.series.len()).unwrap())
            .collect()
    };
    let biased = position_bias(&labels_of(&fixtures::placement_corpus(1, 60, 54, 2000)), 100).unwrap();
    let uniform = position_bias(&labels_of(&fixtures::placement_corpus(2, 60, 0, 2000)), 100).unwrap();
    let threshold = FlagThresholds::default().run_to_failure_mean;
    let c = biased.mean_position > threshold && uniform.mean_position <= threshold;

    let params = ConsistencyParams::new(64);
    let twin_hits = (0..60u64)
        .filter(|&s| {
            let f = fixtures::twin(s, 2000);
            let scan = label_consistency_scan(&f.series, &f.labels, &params).unwrap();
            scan.findings.iter().any(|x| x.kind == FindingKind::FnCandidate)
        })
        .count();
    let unique_findings: usize = (0..60u64)
        .map(|s| {
            let f = fixtures::unique(s, 2000);
            label_consistency_scan(&f.series, &f.labels, &params)
                .unwrap()
                .findings
                .len()
        })
        .sum();
    let d = twin_hits == 60 && unique_findings == 0;

    let rates: Vec<String> = solved_rates.iter().map(|(n, r)| format!("{n} {r:.3}")).collect();
    report(
        "2 flaw fixtures",
        Some(a && b && c && d),
        &format!(
            "(a) {} (b) high density {dense_hits}/60 (c) biased mean {:.3}, uniform mean {:.3} (d) twins with FN {twin_hits}/60, findings on unique {unique_findings}",
            rates.join(", "),
            biased.mean_position,
            uniform.mean_position
        ),
    );
    assert!(a, "solve rates {solved_rates:?}");
    assert!(b && c && d);
}

// 3

#[test]
fn criterion_3_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut moving_err: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=500);
        let k = rng.random_range(1..=101);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) * 10.0).collect();
        let (om, os) = oracle_mean_std(&x, k);
        let mm = moving_mean(&x, k);
        let ms = moving_std(&x, k);
        for i in 0..n {
            moving_err = moving_err.max((mm[i] - om[i]).abs()).max((ms[i] - os[i]).abs());
        }
    }

    let mut discord_err: f64 = 0.0;
    for s in 0..50u64 {
        let mut r = ChaCha8Rng::seed_from_u64(1000 + s);
        let n = r.random_range(200..=2000);
        let m = r.random_range(8..=48);
        let mut x = noisy_sine(n, 0.2, &mut r);
        if s % 5 == 0 {
            let at = r.random_range(0..n - 2 * m);
            let held = x[at];
            x[at..at + m + 5].iter_mut().for_each(|v| *v = held);
        }
        let ts = TimeSeries::new("d", x.clone()).unwrap();
        let p = DiscordParams::new(m);
        let got = discord_score(&ts, &p).unwrap();
        let want = oracle_discord(&x, m, p.exclusion);
        for (a, b) in got.scores().iter().zip(&want) {
            discord_err = discord_err.max((a - b).abs());
        }
    }

    let mut label_mismatch = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=300);
        let density = rng.random_range(0.0..1.0);
        let flags: Vec<bool> = (0..n).map(|_| rng.random_bool(density)).collect();
        let labels = regions_from_flags(&flags);
        // scan oracle
        let mut runs = Vec::new();
        let mut i = 0;
        while i < n {
            if flags[i] {
                let s = i;
                while i + 1 < n && flags[i + 1] {
                    i += 1;
                }
                runs.push((s, i));
            }
            i += 1;
        }
        let labeled = flags.iter().filter(|&&f| f).count();
        let longest = runs.iter().map(|(s, e)| e - s + 1).max().unwrap_or(0);
        let gap = runs.windows(2).map(|w| w[1].0 - w[0].1 - 1).min();
        let got: Vec<(usize, usize)> = labels.regions().iter().map(|r| (r.start, r.end)).collect();
        let d = density_metrics(&labels);
        let ok = got == runs
            && labels.to_flags() == flags
            && d.labeled_samples == labeled
            && d.region_count == runs.len()
            && d.anomaly_fraction == labeled as f64 / n as f64
            && d.max_region_fraction == longest as f64 / n as f64
            && d.min_inter_region_gap == gap;
        label_mismatch += usize::from(!ok);
    }

    let pass = moving_err <= 1e-12 && discord_err <= 1e-9 && label_mismatch == 0;
    report(
        "3 oracle equivalence",
        Some(pass),
        &format!("moving stats max err {moving_err:.2e}, discord max err {discord_err:.2e}, label mismatches {label_mismatch}"),
    );
    assert!(pass);
}

// 4

fn point_labels(n: usize, points: &[usize]) -> (LabelSet, Vec<bool>) {
    let mut flags = vec![false; n];
    points.iter().for_each(|&p| flags[p] = true);
    (LabelSet::from_flags(&flags), flags)
}

#[test]
fn criterion_4_search_completeness() {
    let crit = SolveCriterion { w: 1 };
    let families = [FamilyId::AbsDiffThresh, FamilyId::DiffThresh];
    let grid = SearchGrid::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    let mut positives = 0;
    let mut found = 0;
    let mut verified = 0;
    while positives < 200 {
        let n = rng.random_range(60..400);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let count = rng.random_range(1..=3);
        let points: Vec<usize> = (0..count).map(|_| rng.random_range(1..n - 1)).collect();
        for &p in &points {
            let jump = rng.random_range(1.5..6.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            if rng.random_bool(0.5) {
                v[p] += jump;
            } else {
                v[p..].iter_mut().for_each(|x| *x += jump);
            }
        }
        let (labels, flags) = point_labels(n, &points);
        if !oracle_threshold_exists(&v, &flags, crit.w) {
            continue;
        }
        positives += 1;
        let ts = TimeSeries::new("p", v).unwrap();
        if let Some(spec) = brute_force_search(&ts, &labels, &families, &grid, crit).unwrap() {
            found += 1;
            let got = apply_oneliner(&spec, &ts).unwrap();
            verified += usize::from(oracle_solved(&got, &flags, crit.w));
        }
    }

    let mut negatives = 0;
    let mut wrongly_found = 0;
    while negatives < 50 {
        let n = rng.random_range(60..400);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let count = rng.random_range(1..=3);
        let points: Vec<usize> = (0..count).map(|_| rng.random_range(1..n - 1)).collect();
        let (labels, flags) = point_labels(n, &points);
        if oracle_threshold_exists(&v, &flags, crit.w) {
            continue;
        }
        negatives += 1;
        let ts = TimeSeries::new("q", v).unwrap();
        wrongly_found += usize::from(
            brute_force_search(&ts, &labels, &families, &grid, crit)
                .unwrap()
                .is_some(),
        );
    }

    let pass = found == 200 && verified == 200 && wrongly_found == 0;
    report(
        "4 search completeness",
        Some(pass),
        &format!("found {found}/200 (oracle-verified {verified}), false solutions {wrongly_found}/50"),
    );
    assert!(pass);
}

// 5

#[test]
fn criterion_5_discord_quality() {
    let n = 8000;
    let m = 128;
    let p = DiscordParams::new(m);
    let detector = tsaudit_core::detectors::Discord(p);
    let cfg = ScoringConfig { slop: 100 };
    let mut correct = 0;
    let mut affine_err: f64 = 0.0;
    for s in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + s);
        let clean = TimeSeries::new(format!("c{s}"), noisy_sine(n, 0.05, &mut rng))
            .unwrap()
            .with_train_end(n / 4)
            .unwrap();
        let kind = match s % 3 {
            0 => InjectionKind::Spike { magnitude: 5.0 },
            1 => InjectionKind::Dropout {
                length: 20,
                value: None,
            },
            _ => InjectionKind::Freeze { length: 60 },
        };
        let (series, region) = inject_anomaly(
            &clean,
            &InjectionSpec {
                kind,
                location: Placement::Random,
                seed: s,
            },
        )
        .unwrap();
        let meta = UcrMeta {
            dataset_name: format!("inj{s}"),
            train_end: n / 4,
            begin: region.start,
            end: region.end,
        };
        let r = evaluate_detector(&[(series.clone(), meta)], &ArgmaxLocator(&detector), &cfg);
        correct += r.correct;

        let a = rng.random_range(0.5..5.0);
        let b = rng.random_range(-100.0..100.0);
        let moved = series
            .with_values(series.values().iter().map(|v| a * v + b).collect())
            .unwrap();
        let t0 = discord_score(&series, &p).unwrap();
        let t1 = discord_score(&moved, &p).unwrap();
        for (x, y) in t0.scores().iter().zip(t1.scores()) {
            affine_err = affine_err.max((x - y).abs());
        }
    }
    let rate = correct as f64 / 50.0;
    let pass = rate >= 0.95 && affine_err <= 1e-6;
    report(
        "5 discord baseline",
        Some(pass),
        &format!("top-1 correct {correct}/50 = {rate:.2}, affine max err {affine_err:.2e}"),
    );
    assert!(pass);
}

// 6

#[test]
fn criterion_6_nab_taxi_discords() {
    let Some(path) = std::env::var_os("NAB_TAXI_CSV").map(PathBuf::from) else {
        report("6 NAB taxi discords", None, "NAB_TAXI_CSV not set");
        return;
    };
    let started = Instant::now();
    let l = load_series(&path, SeriesFormat::CsvValueLabel).unwrap();
    let stamps = l.timestamps.clone().expect("taxi data has timestamps");
    let m = 96;
    let p = DiscordParams::new(m);
    let trace = discord_score(&l.series, &p).unwrap();
    let top = top_k_discords(&trace, 10, m);
    let centers: Vec<usize> = top.iter().map(|&s| s + m / 2).collect();
    let events = ["2014-11-02", "2014-11-27", "2014-12-25", "2015-01-01", "2015-01-27"];
    let day = 48;
    let mut hits = Vec::new();
    for e in events {
        let idx: Vec<usize> = (0..stamps.len()).filter(|&i| stamps[i].starts_with(e)).collect();
        let (Some(&lo), Some(&hi)) = (idx.first(), idx.last()) else {
            continue;
        };
        if centers.iter().any(|&c| c + day >= lo && c <= hi + day) {
            hits.push(e);
        }
    }
    let dir = tempfile::tempdir().unwrap();
    write_plot_bundle(
        &l.series,
        None,
        &[("discord".into(), trace)],
        Some(&stamps),
        &dir.path().join("taxi.tsv"),
    )
    .unwrap();
    let secs = started.elapsed().as_secs_f64();
    let pass = hits.len() >= 3 && secs <= 60.0;
    report(
        "6 NAB taxi discords",
        Some(pass),
        &format!(
            "{}/5 events near a top-10 discord ({}), {secs:.1}s",
            hits.len(),
            hits.join(" ")
        ),
    );
    assert!(pass);
}

// 7

#[test]
fn criterion_7_protocol() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"
        .chars()
        .collect();
    let mut round_trip_failures = 0;
    for _ in 0..1000 {
        let len = rng.random_range(1..16);
        let mut name: String = (0..len)
            .map(|_| alphabet[rng.random_range(0..alphabet.len())])
            .collect();
        name.insert(0, alphabet[rng.random_range(0..52)]);
        let train_end = rng.random_range(1..100_000);
        let begin = train_end + rng.random_range(1..100_000);
        let meta = UcrMeta {
            dataset_name: name,
            train_end,
            begin,
            end: begin + rng.random_range(0..5_000),
        };
        let ext = if rng.random_bool(0.5) { ".txt" } else { "" };
        let parsed = parse_ucr_name(&format!("{}{ext}", meta.file_name()));
        round_trip_failures += usize::from(parsed.as_ref() != Ok(&meta));
    }
    let bidmc = parse_ucr_name("UCR_Anomaly_BIDMC1_2500_5400_5600").unwrap();
    let park = parse_ucr_name("UCR_Anomaly_park3m_60000_72150_72495").unwrap();
    let examples = (bidmc.train_end, bidmc.begin, bidmc.end) == (2500, 5400, 5600)
        && (park.dataset_name.as_str(), park.train_end, park.begin, park.end) == ("park3m", 60000, 72150, 72495);

    let mut monotone_violations = 0;
    for _ in 0..1000 {
        let start = rng.random_range(0..1000);
        let r = Region::new(start, start + rng.random_range(0..50)).unwrap();
        let slop = rng.random_range(0..150);
        // predictions at and just past either boundary
        for pred in [
            r.start.saturating_sub(slop),
            r.start.saturating_sub(slop + 1),
            r.end + slop,
            r.end + slop + 1,
        ] {
            for extra in [0, 1, 10, 100] {
                if score_region(pred, r, slop) && !score_region(pred, r, slop + extra) {
                    monotone_violations += 1;
                }
            }
        }
    }

    let corpus: Vec<(TimeSeries, UcrMeta)> = fixtures::placement_corpus(1, 60, 54, 2000)
        .into_iter()
        .map(|f| (f.series, f.meta))
        .collect();
    let r = evaluate_detector(&corpus, &ArgmaxLocator(&LastPoint), &ScoringConfig { slop: 100 });
    let constructed = 54.0 / 60.0;

    let pass = round_trip_failures == 0 && examples && monotone_violations == 0 && r.accuracy == constructed;
    report(
        "7 protocol",
        Some(pass),
        &format!(
            "name round-trip failures {round_trip_failures}/1000, cited names ok {examples}, monotonicity violations {monotone_violations}, last-point accuracy {:.3} vs constructed {constructed:.3}",
            r.accuracy
        ),
    );
    assert!(pass);
}

// 8

fn tsaudit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tsaudit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tree_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            continue;
        }
        out.insert(
            p.file_name().unwrap().to_string_lossy().into_owned(),
            std::fs::read(&p).unwrap(),
        );
    }
    out
}

#[test]
fn criterion_8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir(&data).unwrap();
    for (i, f) in [
        fixtures::spike(1, 1500),
        fixtures::twin(2, 1500),
        fixtures::freeze(3, 1500),
    ]
    .into_iter()
    .enumerate()
    {
        write_sidecar_series(&data.join(format!("s{i}.txt")), &f.series, &f.labels).unwrap();
    }
    let data_s = data.to_str().unwrap();
    let s0 = data.join("s0.txt");
    let s0 = s0.to_str().unwrap();

    let mut identical = Vec::new();
    let mut outputs = Vec::new();
    for jobs in ["1", "3", "8"] {
        let out = dir.path().join(format!("run{jobs}"));
        std::fs::create_dir(&out).unwrap();
        let o = |name: &str| out.join(name).to_str().unwrap().to_string();
        let runs = [
            tsaudit(&[
                "audit",
                data_s,
                "--jobs",
                jobs,
                "--seed",
                "11",
                "--tolerance",
                "0,1,2",
                "--out",
                &o("report.json"),
                "--plots",
                &o("plots"),
            ]),
            tsaudit(&[
                "discord",
                s0,
                "--jobs",
                jobs,
                "--sublen",
                "32",
                "--out",
                &o("discord.tsv"),
            ]),
            tsaudit(&[
                "probe",
                s0,
                "--jobs",
                jobs,
                "--seed",
                "5",
                "--detector",
                "discord:m=32",
                "--perturbations",
                "gaussian-noise:sigma=0.1,wandering-baseline:step=0.01,amplitude-scale:3",
                "--out",
                &o("probe.json"),
            ]),
        ];
        for r in &runs {
            assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        }
        let mut files = tree_bytes(&out);
        for (k, v) in tree_bytes(&out.join("plots")) {
            files.insert(format!("plots/{k}"), v);
        }
        outputs.push((jobs, files, runs.map(|r| r.stdout)));
    }
    let (_, base_files, base_stdout) = &outputs[0];
    for (jobs, files, stdout) in &outputs[1..] {
        identical.push((jobs, files == base_files && stdout == base_stdout));
    }
    let pass = identical.iter().all(|&(_, same)| same) && base_files.len() >= 9;
    report(
        "8 determinism",
        Some(pass),
        &format!(
            "{} artifacts compared across --jobs 1, 3, 8: {identical:?}",
            base_files.len()
        ),
    );
    assert!(pass);
}

#[test]
fn audit_config_defaults_are_usable() {
    // a single audit of each fixture kind must not error
    let cfg = AuditConfig::default();
    for f in [
        fixtures::spike(0, 800),
        fixtures::twin(0, 2000),
        fixtures::high_density(0, 900),
    ] {
        audit_series(&f.series, &f.labels, None, &cfg).unwrap();
    }
}
