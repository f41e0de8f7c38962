//! End-to-end runs of the `tsaudit` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tsaudit_core::fixtures::{self, placement_corpus, Fixture};
use tsaudit_core::ingest::write_sidecar_series;
use tsaudit_core::{LabelSet, Region, TimeSeries};

fn tsaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsaudit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_fixture(dir: &Path, name: &str, f: &Fixture) -> String {
    let p = dir.join(name);
    write_sidecar_series(&p, &f.series, &f.labels).unwrap();
    p.to_str().unwrap().to_string()
}

/// Sawtooth of period 7 with one labeled point: every point has an exact
/// twin one period away, so no local rule can flag it alone.
fn unsolvable() -> Fixture {
    let v: Vec<f64> = (0..700).map(|i| (i % 7) as f64).collect();
    let series = TimeSeries::new("saw", v).unwrap();
    let labels = LabelSet::new(vec![Region::new(352, 352).unwrap()], 700).unwrap();
    Fixture { series, labels }
}

fn write_ucr_corpus(dir: &Path) -> Vec<(String, usize)> {
    placement_corpus(3, 4, 1, 2000)
        .into_iter()
        .map(|f| {
            let name = f.meta.file_name();
            let text: String = f.series.values().iter().map(|x| format!("{x}\n")).collect();
            fs::write(dir.join(format!("{name}.txt")), text).unwrap();
            (name, f.meta.begin)
        })
        .collect()
}

#[test]
fn audit_solves_three_spikes() {
    let dir = tempfile::tempdir().unwrap();
    for s in 0..3 {
        write_fixture(dir.path(), &format!("spike{s}.txt"), &fixtures::spike(s, 1000));
    }
    let report = dir.path().join("report.json");
    let o = tsaudit(&["audit", dir.path().to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let solved = &v["aggregates"]["solved"][0];
    assert_eq!(solved["solved"], 3);
    assert_eq!(solved["total"], 3);
}

#[test]
fn audit_of_unlabeled_file_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bare.csv");
    fs::write(&p, "1\n2\n3\n4\n5\n").unwrap();
    let o = tsaudit(&["audit", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bare.csv"), "{}", stderr(&o));
}

#[test]
fn fail_on_flaw_exits_3_for_dense_labels() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_fixture(dir.path(), "dense.txt", &fixtures::high_density(1, 900));
    let o = tsaudit(&["audit", &p, "--fail-on-flaw", "--topk", "0"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stdout(&o).contains("HIGH_DENSITY"));
    let o = tsaudit(&["audit", &p, "--topk", "0"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn oneliner_search_prints_a_threshold_expression() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_fixture(dir.path(), "spike.txt", &fixtures::spike(4, 1000));
    let o = tsaudit(&["oneliner", &p, "--search"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert!(first.starts_with("abs(diff(TS)) > "), "{first}");
}

#[test]
fn oneliner_const_run_prints_flags() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures::freeze(2, 1000);
    let r = f.region();
    let p = write_fixture(dir.path(), "freeze.txt", &f);
    let o = tsaudit(&["oneliner", &p, "--family", "const-run", "--params", "run_len=3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("movmax(abs(diff(TS)), [0 1]) == 0"), "{out}");
    assert!(out.contains("flags ("), "{out}");
    assert!(out.contains(&format!("-{}", r.end)), "{out}");
}

#[test]
fn oneliner_reports_absence_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_fixture(dir.path(), "saw.txt", &unsolvable());
    let o = tsaudit(&["oneliner", &p, "--search", "--tolerance", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("no solving one-liner found"));
}

#[test]
fn discord_rejects_long_subsequences() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_fixture(dir.path(), "s.txt", &fixtures::spike(1, 200));
    let o = tsaudit(&["discord", &p, "--sublen", "150"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn discord_bundle_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_fixture(dir.path(), "s.txt", &fixtures::spike(1, 600));
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    for out in [&a, &b] {
        let o = tsaudit(&[
            "discord",
            &p,
            "--sublen",
            "32",
            "--topk",
            "10",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn score_with_exact_begins_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("ucr");
    fs::create_dir(&data).unwrap();
    let corpus = write_ucr_corpus(&data);
    let pred: String = corpus.iter().map(|(id, b)| format!("{id} {b}\n")).collect();
    let pred_path = dir.path().join("pred.txt");
    fs::write(&pred_path, pred).unwrap();
    let o = tsaudit(&["score", data.to_str().unwrap(), "--pred", pred_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(
        stdout(&o).contains("accuracy: 1.000 (4/4) with slop 100"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn score_counts_missing_predictions_as_wrong() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("ucr");
    fs::create_dir(&data).unwrap();
    let corpus = write_ucr_corpus(&data);
    let pred: String = corpus[1..].iter().map(|(id, b)| format!("{id},{b}\n")).collect();
    let pred_path = dir.path().join("pred.csv");
    fs::write(&pred_path, pred).unwrap();
    let o = tsaudit(&["score", data.to_str().unwrap(), "--pred", pred_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy: 0.750 (3/4)"), "{}", stdout(&o));
    assert!(
        stderr(&o).contains("warning") && stderr(&o).contains(&corpus[0].0),
        "{}",
        stderr(&o)
    );
}

fn accuracy(o: &Output) -> f64 {
    let out = stdout(o);
    let line = out.lines().find(|l| l.starts_with("accuracy: ")).unwrap();
    line["accuracy: ".len()..]
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn score_accuracy_grows_with_slop() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("ucr");
    fs::create_dir(&data).unwrap();
    let corpus = write_ucr_corpus(&data);
    // left of the region by 1, 50, 100 and 150 samples
    let pred: String = corpus
        .iter()
        .zip([1, 50, 100, 150])
        .map(|((id, b), d)| format!("{id} {}\n", b - d))
        .collect();
    let pred_path = dir.path().join("pred.txt");
    fs::write(&pred_path, pred).unwrap();
    let mut last = -1.0;
    for slop in ["0", "1", "50", "100", "200"] {
        let o = tsaudit(&[
            "score",
            data.to_str().unwrap(),
            "--pred",
            pred_path.to_str().unwrap(),
            "--slop",
            slop,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let acc = accuracy(&o);
        assert!(acc >= last, "slop {slop}: {acc} < {last}");
        last = acc;
    }
    assert_eq!(last, 1.0);
}

#[test]
fn inject_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let clean: String = fixtures::noisy_sine(800, 0.05, &mut rand::SeedableRng::seed_from_u64(1))
        .iter()
        .map(|x| format!("{x}\n"))
        .collect();
    let input = dir.path().join("clean.csv");
    fs::write(&input, clean).unwrap();
    let run = |name: &str, seed: &str| -> (Vec<u8>, Vec<u8>) {
        let out = dir.path().join(name);
        let o = tsaudit(&[
            "inject",
            input.to_str().unwrap(),
            "--kind",
            "freeze",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut side = out.clone().into_os_string();
        side.push(".regions.json");
        (fs::read(&out).unwrap(), fs::read(PathBuf::from(side)).unwrap())
    };
    let a = run("a.txt", "7");
    let b = run("b.txt", "7");
    assert_eq!(a, b);
    let c = run("c.txt", "8");
    assert_ne!(a.1, c.1);
}

fn probe_hits(json: &Path) -> Vec<(bool, Option<bool>)> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["hit_before"].as_bool().unwrap(), e["hit_after"].as_bool()))
        .collect()
}

#[test]
fn probe_identity_and_scaling_keep_hits() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_fixture(dir.path(), "s.txt", &fixtures::spike(6, 1000));
    let out = dir.path().join("probe.json");
    let o = tsaudit(&[
        "probe",
        &p,
        "--detector",
        "discord:m=32",
        "--perturbations",
        "gaussian-noise:sigma=0,amplitude-scale:3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let hits = probe_hits(&out);
    assert_eq!(hits.len(), 2);
    for (before, after) in hits {
        assert!(before);
        assert_eq!(after, Some(before));
    }
}

#[test]
fn unknown_flags_are_usage_errors() {
    let o = tsaudit(&["audit", ".", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tsaudit(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    let o = tsaudit(&["--jobs", "0", "audit", "."]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_lists_every_flag() {
    let o = tsaudit(&["audit", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for flag in [
        "--format",
        "--tolerance",
        "--families",
        "--k-candidates",
        "--c-candidates",
        "--run-len-candidates",
        "--max-b-candidates",
        "--sublen",
        "--alpha",
        "--topk",
        "--slop",
        "--density-threshold",
        "--bias-threshold",
        "--out",
        "--plots",
        "--fail-on-flaw",
        "--jobs",
        "--seed",
        "--config",
    ] {
        assert!(out.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn config_file_fills_unset_flags() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_fixture(dir.path(), "dense.txt", &fixtures::high_density(2, 900));
    let cfg = dir.path().join("audit.conf");
    fs::write(&cfg, "# strict mode\nfail-on-flaw = true\ntopk = 0\n").unwrap();
    let o = tsaudit(&["--config", cfg.to_str().unwrap(), "audit", &p]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    // the command line wins over the file
    fs::write(&cfg, "topk = 0\ndensity-threshold = 0.9\n").unwrap();
    let o = tsaudit(&["--config", cfg.to_str().unwrap(), "audit", &p]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!stdout(&o).contains("HIGH_DENSITY"), "{}", stdout(&o));
    let o = tsaudit(&[
        "--config",
        cfg.to_str().unwrap(),
        "audit",
        &p,
        "--density-threshold",
        "0.2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("HIGH_DENSITY"), "{}", stdout(&o));

    fs::write(&cfg, "bogus = 1\n").unwrap();
    let o = tsaudit(&["--config", cfg.to_str().unwrap(), "audit", &p]);
    assert_eq!(o.status.code(), Some(1));
}
