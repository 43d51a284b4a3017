//! Time series as CSV tables or standalone SVG line charts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::output::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SeriesFormat {
    Csv,
    Svg,
}

impl SeriesFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SeriesFormat::Csv => "csv",
            SeriesFormat::Svg => "svg",
        }
    }
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series `{0}` is empty")]
    Empty(String),

    #[error("series `{name}` has {times} times but {values} values")]
    Length { name: String, times: usize, values: usize },

    #[error("series `{name}` has a non-finite sample at index {index}")]
    NonFinite { name: String, index: usize },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy)]
pub struct Series<'a> {
    pub name: &'a str,
    pub times: &'a [f64],
    pub values: &'a [f64],
}

impl Series<'_> {
    fn validate(&self) -> Result<(), SeriesError> {
        if self.times.len() != self.values.len() {
            return Err(SeriesError::Length {
                name: self.name.to_string(),
                times: self.times.len(),
                values: self.values.len(),
            });
        }
        if self.times.is_empty() {
            return Err(SeriesError::Empty(self.name.to_string()));
        }
        let bad = self
            .times
            .iter()
            .zip(self.values)
            .position(|(t, v)| !t.is_finite() || !v.is_finite());
        match bad {
            Some(index) => Err(SeriesError::NonFinite {
                name: self.name.to_string(),
                index,
            }),
            None => Ok(()),
        }
    }
}

/// `t,value` header, then one row per sample with 17 significant digits.
pub fn render_csv(series: &Series) -> Result<String, SeriesError> {
    series.validate()?;
    let mut out = String::from("t,value\n");
    for (t, v) in series.times.iter().zip(series.values) {
        writeln!(out, "{t:.16e},{v:.16e}").unwrap();
    }
    Ok(out)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let half = 0.5 * lo.abs().max(1.0);
        (lo - half, hi + half)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Single polyline chart with labelled axes and end-point tick values.
pub fn render_svg(series: &Series) -> Result<String, SeriesError> {
    series.validate()?;
    let fold = |xs: &[f64]| xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (t0, t1) = padded_range(fold(series.times).0, fold(series.times).1);
    let (v0, v1) = padded_range(fold(series.values).0, fold(series.values).1);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let x = |t: f64| LEFT + (t - t0) / (t1 - t0) * pw;
    let y = |v: f64| TOP + (v1 - v) / (v1 - v0) * ph;
    let name = escape(series.name);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{name}</text>"#, LEFT + pw / 2.0).unwrap();
    let (xb, yb) = (TOP + ph, LEFT + pw);
    writeln!(out, r#"<line x1="{LEFT}" y1="{xb}" x2="{yb}" y2="{xb}" stroke="black"/>"#).unwrap();
    writeln!(out, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{xb}" stroke="black"/>"#).unwrap();
    for (t, anchor) in [(t0, "start"), (t1, "end")] {
        writeln!(
            out,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#,
            x(t),
            xb + 18.0,
            short(t)
        )
        .unwrap();
    }
    for v in [v0, v1] {
        writeln!(
            out,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            LEFT - 6.0,
            y(v),
            short(v)
        )
        .unwrap();
    }
    writeln!(out, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">t</text>"#, LEFT + pw / 2.0, HEIGHT - 16.0).unwrap();
    writeln!(
        out,
        r#"<text x="20" y="{0}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {0})">{name}</text>"#,
        TOP + ph / 2.0
    )
    .unwrap();
    let points: Vec<String> = series
        .times
        .iter()
        .zip(series.values)
        .map(|(&t, &v)| format!("{:.2},{:.2}", x(t), y(v)))
        .collect();
    writeln!(out, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, points.join(" ")).unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

fn short(x: f64) -> String {
    if x == 0.0 || (1e-3..1e4).contains(&x.abs()) {
        format!("{}", (x * 1e4).round() / 1e4)
    } else {
        format!("{x:.3e}")
    }
}

pub fn emit_series(series: &Series, path: &Path, format: SeriesFormat) -> Result<(), SeriesError> {
    let text = match format {
        SeriesFormat::Csv => render_csv(series)?,
        SeriesFormat::Svg => render_svg(series)?,
    };
    write_atomic(path, text.as_bytes()).map_err(|source| SeriesError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_gives_identical_rows() {
        let times = [0.0, 0.5, 1.0];
        let values = [1.0; 3];
        let csv = render_csv(&Series { name: "one", times: &times, values: &values }).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,value");
        assert_eq!(lines.len(), 4);
        for l in &lines[1..] {
            assert!(l.ends_with(",1.0000000000000000e0"), "{l}");
        }
    }

    #[test]
    fn csv_values_parse_back_exactly() {
        let times = [0.0, 0.1, 1.0 / 3.0];
        let values = [std::f64::consts::PI, -1e-300, 2.0f64.sqrt()];
        let csv = render_csv(&Series { name: "x", times: &times, values: &values }).unwrap();
        for (line, (&t, &v)) in csv.lines().skip(1).zip(times.iter().zip(&values)) {
            let (a, b) = line.split_once(',').unwrap();
            assert_eq!(a.parse::<f64>().unwrap(), t);
            assert_eq!(b.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn empty_series_is_an_error_and_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let err = emit_series(&Series { name: "e", times: &[], values: &[] }, &path, SeriesFormat::Csv).unwrap_err();
        assert!(matches!(err, SeriesError::Empty(_)));
        assert!(!path.exists());
    }

    #[test]
    fn svg_is_self_contained_with_one_polyline() {
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let values: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        let svg = render_svg(&Series { name: "<W>", times: &times, values: &values }).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("&lt;W&gt;"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn unwritable_path_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("x.csv");
        let err = emit_series(&Series { name: "x", times: &[0.0], values: &[1.0] }, &path, SeriesFormat::Csv).unwrap_err();
        assert!(matches!(err, SeriesError::Write { .. }));
    }
}
