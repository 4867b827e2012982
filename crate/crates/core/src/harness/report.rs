//! Report files: result tables, confusion matrices and SVG figures.
//!
//! Every figure has a CSV source next to it; [`render_figures`] rebuilds the
//! SVGs from those CSVs, so `report` can regenerate a directory offline.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::experiment::ExperimentOutput;
use super::table::{read_runs_csv, write_runs_csv, ResultsTable, RunRecord};
use crate::error::{Error, Result};
use crate::fuzzifier;
use crate::neuralgas;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn axes(s: &mut String, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) {
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2.0, MARGIN);
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    for (v, x, y, anchor) in [
        (x_range.0, x0, y0 + 16.0, "start"),
        (x_range.1, x1, y0 + 16.0, "end"),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{}</text>"#,
            tick(v)
        );
    }
    for (v, y) in [(y_range.0, y0), (y_range.1, y1 + 4.0)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            tick(v)
        );
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Line chart, one `<polyline>` per series with one vertex per point.
pub fn svg_line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let xr = padded_range(all().map(|p| p.0));
    let yr = padded_range(all().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - xr.0) / (xr.1 - xr.0) * (WIDTH - 1.5 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - yr.0) / (yr.1 - yr.0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = svg_open(title);
    axes(&mut s, x_label, y_label, xr, yr);
    for (i, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            ser.color,
            pts.join(" ")
        );
        if series.len() > 1 {
            let ly = MARGIN + 16.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{ly}" fill="{}" text-anchor="end">{}</text>"#,
                WIDTH - MARGIN / 2.0,
                ser.color,
                escape(ser.name)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Vertical bars in the given order.
pub fn svg_bar_chart(title: &str, y_label: &str, labels: &[String], values: &[f64]) -> String {
    let top = values.iter().copied().fold(0.0, f64::max).max(1e-12);
    let mut s = svg_open(title);
    axes(
        &mut s,
        "feature",
        y_label,
        (0.0, values.len() as f64),
        (0.0, top),
    );
    let slot = (WIDTH - 1.5 * MARGIN) / values.len().max(1) as f64;
    let base = HEIGHT - MARGIN;
    for (i, (label, &v)) in labels.iter().zip(values).enumerate() {
        let h = v.max(0.0) / top * (HEIGHT - 2.0 * MARGIN);
        let x = MARGIN + slot * i as f64 + slot * 0.1;
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="#4878a8"><title>{} = {v:.6}</title></rect>"##,
            base - h,
            slot * 0.8,
            escape(label)
        );
        let cx = x + slot * 0.4;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" font-size="9" text-anchor="end" transform="rotate(-60 {cx:.2} {:.2})">{}</text>"#,
            base + 12.0,
            base + 12.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Output directory for `config` under `out_root`.
pub fn run_dir(out_root: &Path, config: &ExperimentConfig) -> PathBuf {
    out_root.join(format!("run-{:016x}", config.hash()))
}

/// Writes the table files derived from the run records.
pub fn write_tables(dir: &Path, runs: &[RunRecord]) -> Result<ResultsTable> {
    let table = ResultsTable::from_runs(runs);
    write(dir, "results.csv", &table.to_csv())?;
    write(dir, "results.txt", &table.to_text())?;
    write(dir, "per_fraction.csv", &table.per_fraction_csv())?;
    let failures: Vec<RunRecord> = runs.iter().filter(|r| r.error.is_some()).cloned().collect();
    let mut buf = Vec::new();
    if failures.is_empty() {
        buf.extend_from_slice(
            b"classifier,selector,seed,fraction_index,fraction,k,run_seed,accuracy,error\n",
        );
    } else {
        write_runs_csv(&failures, &mut buf)?;
    }
    write(dir, "failures.csv", &String::from_utf8_lossy(&buf))?;
    Ok(table)
}

/// Writes every artifact of a finished experiment and returns the directory.
pub fn write_experiment(
    out_root: &Path,
    config: &ExperimentConfig,
    output: &ExperimentOutput,
) -> Result<PathBuf> {
    let dir = run_dir(out_root, config);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write(&dir, "config.toml", &config.to_toml())?;

    let mut buf = Vec::new();
    write_runs_csv(&output.runs, &mut buf)?;
    write(&dir, "runs.csv", &String::from_utf8_lossy(&buf))?;
    write_tables(&dir, &output.runs)?;

    for (clf, cm) in &output.confusions {
        let mut buf = Vec::new();
        cm.write_csv(&mut buf).map_err(|e| Error::io(&dir, e))?;
        write(
            &dir,
            &format!("confusion_{}.csv", clf.name()),
            &String::from_utf8_lossy(&buf),
        )?;
    }

    if let Some(trace) = &output.pso_trace {
        let mut buf = Vec::new();
        crate::swarmopt::write_trace_csv(trace, &mut buf).map_err(|e| Error::io(&dir, e))?;
        write(&dir, "pso_trace.csv", &String::from_utf8_lossy(&buf))?;
    }

    let mut s = String::from("rank,index,name,score\n");
    for (rank, j) in neuralgas::ranking(&output.ngn_scores)
        .into_iter()
        .enumerate()
    {
        let _ = writeln!(
            s,
            "{rank},{j},{},{:.6}",
            output.feature_names[j], output.ngn_scores[j]
        );
    }
    write(&dir, "ngn_scores.csv", &s)?;

    let m = &output.membership;
    let mut s = String::from("feature,x,low,medium,high\n");
    for [x, lo, mid, hi] in fuzzifier::membership_curve(m.t_low, m.t_high, 201)? {
        let _ = writeln!(s, "{},{x:.6},{lo:.6},{mid:.6},{hi:.6}", m.feature);
    }
    write(&dir, "membership.csv", &s)?;

    render_figures(&dir)?;
    Ok(dir)
}

fn csv_rows(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let text = read(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader.records().map(|r| r.map_err(Error::from)).collect()
}

fn field(row: &csv::StringRecord, i: usize, path: &Path) -> Result<f64> {
    row.get(i)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Config(format!("{}: malformed row {:?}", path.display(), row)))
}

/// Regenerates the SVG figures from whichever CSV sources exist in `dir`.
pub fn render_figures(dir: &Path) -> Result<()> {
    let path = dir.join("pso_trace.csv");
    if path.exists() {
        let points = csv_rows(&path)?
            .iter()
            .map(|r| Ok((field(r, 0, &path)?, field(r, 1, &path)?)))
            .collect::<Result<Vec<_>>>()?;
        let svg = svg_line_plot(
            "PSO best cost",
            "iteration",
            "best cost (1 - accuracy)",
            &[Series {
                name: "best cost",
                color: "#c0392b",
                points,
            }],
        );
        write(dir, "pso_trace.svg", &svg)?;
    }

    let path = dir.join("ngn_scores.csv");
    if path.exists() {
        let rows = csv_rows(&path)?;
        let labels: Vec<String> = rows
            .iter()
            .map(|r| r.get(2).unwrap_or("").to_string())
            .collect();
        let values = rows
            .iter()
            .map(|r| field(r, 3, &path))
            .collect::<Result<Vec<_>>>()?;
        write(
            dir,
            "ngn_scores.svg",
            &svg_bar_chart(
                "Neural gas feature scores",
                "codebook variance",
                &labels,
                &values,
            ),
        )?;
    }

    let path = dir.join("membership.csv");
    if path.exists() {
        let rows = csv_rows(&path)?;
        let feature = rows
            .first()
            .and_then(|r| r.get(0))
            .unwrap_or("")
            .to_string();
        let mut series: Vec<Series> = [
            ("low", "#2e86c1"),
            ("medium", "#28b463"),
            ("high", "#cb4335"),
        ]
        .into_iter()
        .map(|(name, color)| Series {
            name,
            color,
            points: Vec::new(),
        })
        .collect();
        for r in &rows {
            let x = field(r, 1, &path)?;
            for (c, s) in series.iter_mut().enumerate() {
                s.points.push((x, field(r, 2 + c, &path)?));
            }
        }
        let svg = svg_line_plot(
            &format!("Membership functions ({feature})"),
            "standardized value",
            "membership",
            &series,
        );
        write(dir, "membership.svg", &svg)?;
    }
    Ok(())
}

/// Rebuilds tables and figures of an existing results directory from its
/// `runs.csv` and figure sources.
pub fn report(dir: &Path) -> Result<ResultsTable> {
    let path = dir.join("runs.csv");
    let runs = read_runs_csv(read(&path)?.as_bytes())?;
    let table = write_tables(dir, &runs)?;
    render_figures(dir)?;
    Ok(table)
}
