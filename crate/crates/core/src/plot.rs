//! Plot bundles: a tab-separated table of the series, its labels and score
//! traces in original coordinates, plus an optional SVG line chart.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::ReportError;
use crate::model::{LabelSet, ScoreTrace, TimeSeries};
use crate::numfmt::sig9;

/// Renders the bundle table. Columns are `index`, `value`, `label` (empty
/// without labels), one per trace, and `timestamp` last when given.
pub fn render_plot_bundle(
    ts: &TimeSeries,
    labels: Option<&LabelSet>,
    traces: &[(String, ScoreTrace)],
    timestamps: Option<&[String]>,
) -> Result<String, ReportError> {
    let n = ts.len();
    let mut seen = HashSet::new();
    for (name, trace) in traces {
        if !seen.insert(name.as_str()) {
            return Err(ReportError::DuplicateTrace(name.clone()));
        }
        if trace.series_length() != n {
            return Err(ReportError::TraceLength {
                name: name.clone(),
                covers: trace.series_length(),
                len: n,
            });
        }
    }
    let columns: Vec<Vec<Option<f64>>> = traces.iter().map(|(_, t)| t.to_original()).collect();

    let mut out = String::with_capacity(n * (24 + 12 * traces.len()));
    out.push_str("index\tvalue\tlabel");
    for (name, _) in traces {
        out.push('\t');
        out.push_str(name);
    }
    if timestamps.is_some() {
        out.push_str("\ttimestamp");
    }
    out.push('\n');
    for (i, v) in ts.values().iter().enumerate() {
        let label = labels.map_or("", |l| if l.contains(i) { "1" } else { "0" });
        let _ = write!(out, "{i}\t{}\t{label}", sig9(*v));
        for col in &columns {
            out.push('\t');
            if let Some(s) = col[i] {
                out.push_str(&sig9(s));
            }
        }
        if let Some(t) = timestamps {
            out.push('\t');
            out.push_str(t.get(i).map_or("", String::as_str));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_plot_bundle(
    ts: &TimeSeries,
    labels: Option<&LabelSet>,
    traces: &[(String, ScoreTrace)],
    timestamps: Option<&[String]>,
    path: &Path,
) -> Result<(), ReportError> {
    let text = render_plot_bundle(ts, labels, traces, timestamps)?;
    fs::write(path, text).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

const PALETTE: [&str; 4] = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn polyline(
    points: impl Iterator<Item = (usize, f64)>,
    n: usize,
    top: f64,
    height: f64,
    color: &str,
    width: f64,
) -> String {
    let pts: Vec<(usize, f64)> = points.collect();
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, v)| {
        (a.min(v), b.max(v))
    });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut d = String::new();
    for (i, v) in pts {
        let x = 40.0 + 900.0 * i as f64 / (n.max(2) - 1) as f64;
        let y = top + height - height * (v - lo) / span;
        let _ = write!(d, "{x:.2},{y:.2} ");
    }
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" points=\"{}\"/>\n",
        d.trim_end()
    )
}

/// A simple SVG: the series on top with labels shaded, each trace in its
/// own band below.
pub fn render_svg(ts: &TimeSeries, labels: Option<&LabelSet>, traces: &[(String, ScoreTrace)]) -> String {
    let n = ts.len();
    let band = 120.0;
    let height = 40.0 + band * (1 + traces.len()) as f64 + 20.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"980\" height=\"{height}\" viewBox=\"0 0 980 {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    if let Some(l) = labels {
        for r in l.regions() {
            let x0 = 40.0 + 900.0 * r.start as f64 / (n - 1) as f64;
            let x1 = 40.0 + 900.0 * r.end as f64 / (n - 1) as f64;
            let _ = writeln!(
                s,
                "<rect x=\"{x0:.2}\" y=\"20\" width=\"{:.2}\" height=\"{band}\" fill=\"#f4b6b6\"/>",
                (x1 - x0).max(1.0)
            );
        }
    }
    s.push_str(&polyline(
        ts.values().iter().copied().enumerate(),
        n,
        20.0,
        band - 10.0,
        "#1f77b4",
        1.0,
    ));
    for (k, (name, trace)) in traces.iter().enumerate() {
        let top = 20.0 + band * (k + 1) as f64;
        let _ = writeln!(
            s,
            "<text x=\"40\" y=\"{:.0}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>",
            top + 12.0,
            xml_escape(name)
        );
        let pts = trace
            .to_original()
            .into_iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)));
        s.push_str(&polyline(
            pts,
            n,
            top + 16.0,
            band - 26.0,
            PALETTE[k % PALETTE.len()],
            1.0,
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alignment, Region};
    use proptest::prelude::*;

    #[test]
    fn bundle_examples() {
        let ts = TimeSeries::new("b", vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let plain = render_plot_bundle(&ts, None, &[], None).unwrap();
        assert_eq!(plain.lines().count(), 6);
        assert_eq!(plain.lines().next(), Some("index\tvalue\tlabel"));
        assert!(!plain.contains('\r'));

        let t = ScoreTrace::new(vec![0.5, 0.25, 1.0 / 3.0], Alignment::SubseqStart, 3).unwrap();
        let labels = LabelSet::new(vec![Region::point(1)], 5).unwrap();
        let out = render_plot_bundle(&ts, Some(&labels), &[("d".into(), t.clone())], None).unwrap();
        let rows: Vec<&str> = out.lines().collect();
        assert_eq!(rows[1], "0\t1\t0\t0.5");
        assert_eq!(rows[2], "1\t2\t1\t0.25");
        assert_eq!(rows[3], "2\t3\t0\t0.333333333");
        assert_eq!(rows[4], "3\t4\t0\t");
        assert_eq!(rows[5], "4\t5\t0\t");

        let two = render_plot_bundle(&ts, None, &[("a".into(), t.clone()), ("b".into(), t.clone())], None).unwrap();
        assert_eq!(two.lines().next().unwrap().split('\t').count(), 5);
        assert!(matches!(
            render_plot_bundle(&ts, None, &[("a".into(), t.clone()), ("a".into(), t)], None),
            Err(ReportError::DuplicateTrace(_))
        ));
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let ts = TimeSeries::new("b", vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let t = ScoreTrace::pointwise(vec![0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let svg = render_svg(&ts, None, &[("a<b".into(), t)]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b"));
    }

    proptest! {
        #[test]
        fn populated_rows_invert_alignment(len in 1usize..30, m in 1usize..8, which in 0usize..3) {
            let alignment = [Alignment::SubseqStart, Alignment::SubseqMiddle, Alignment::SubseqEnd][which];
            let scores: Vec<f64> = (0..len).map(|i| i as f64 + 0.5).collect();
            let trace = ScoreTrace::new(scores, alignment, m).unwrap();
            let n = trace.series_length();
            prop_assume!(n >= 2);
            let ts = TimeSeries::new("p", vec![0.0; n]).unwrap();
            let out = render_plot_bundle(&ts, None, &[("t".into(), trace.clone())], None).unwrap();
            for (row, line) in out.lines().skip(1).enumerate() {
                let cell = line.split('\t').nth(3).unwrap();
                if !cell.is_empty() {
                    let pos = cell.parse::<f64>().unwrap() - 0.5;
                    prop_assert_eq!(trace.original_index(pos as usize), row);
                }
            }
            let populated = out.lines().skip(1).filter(|l| !l.ends_with('\t')).count();
            prop_assert_eq!(populated, len);
        }
    }
}
