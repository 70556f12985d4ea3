//! Minimal SVG charts for the report: line series and overlaid density
//! histograms. The numeric tables they are drawn from are always written
//! next to them.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

pub struct Series {
    pub label: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
}

pub struct HistGroup {
    pub label: String,
    pub color: String,
    pub counts: Vec<u64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Frame {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Frame { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(out, r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, f.px(xv), y1 + 16.0, tick(xv));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, f.py(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v.fract() == 0.0 && v.abs() < 1e15) {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

fn legend(out: &mut String, items: &[(&str, &str)]) {
    for (i, (label, color)) in items.iter().enumerate() {
        let y = TOP + 8.0 + 16.0 * i as f64;
        let x = W - RIGHT - 120.0;
        let _ = writeln!(out, r#"<rect x="{x}" y="{}" width="10" height="10" fill="{color}"/>"#, y - 9.0);
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, x + 16.0, escape(label));
    }
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x, mut y) = ((f64::INFINITY, f64::NEG_INFINITY), (0.0f64, f64::NEG_INFINITY));
    for &(px, py) in pts {
        x = (x.0.min(px), x.1.max(px));
        y = (y.0.min(py), y.1.max(py));
    }
    if !x.0.is_finite() {
        x = (0.0, 1.0);
        y = (0.0, 1.0);
    }
    let f = Frame::new(x, y);
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, x_label, y_label);
    for s in series {
        let d: Vec<String> = s.points.iter().map(|&(a, b)| format!("{:.2},{:.2}", f.px(a), f.py(b))).collect();
        if !d.is_empty() {
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"><title>{}</title></polyline>"#,
                d.join(" "),
                s.color,
                escape(&s.label)
            );
        }
    }
    let items: Vec<(&str, &str)> = series.iter().map(|s| (s.label.as_str(), s.color.as_str())).collect();
    legend(&mut out, &items);
    out.push_str("</svg>\n");
    out
}

/// Overlaid histograms scaled to probability density so groups of very
/// different sizes share one axis.
pub fn density_chart(title: &str, x_label: &str, edges: &[f64], groups: &[HistGroup]) -> String {
    let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let dens: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let n: u64 = g.counts.iter().sum();
            g.counts
                .iter()
                .zip(&widths)
                .map(|(&c, &w)| if n == 0 || w <= 0.0 { 0.0 } else { c as f64 / (n as f64 * w) })
                .collect()
        })
        .collect();
    let ymax = dens.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let x = (edges.first().copied().unwrap_or(0.0), edges.last().copied().unwrap_or(1.0));
    let f = Frame::new(x, (0.0, if ymax > 0.0 { ymax } else { 1.0 }));
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, x_label, "density");
    for (g, d) in groups.iter().zip(&dens) {
        let _ = writeln!(out, r#"<g fill="{}" fill-opacity="0.45"><title>{}</title>"#, g.color, escape(&g.label));
        for (i, &v) in d.iter().enumerate() {
            if v > 0.0 {
                let (x0, x1) = (f.px(edges[i]), f.px(edges[i + 1]));
                let (y0, y1) = (f.py(v), f.py(0.0));
                let _ = writeln!(out, r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#, x0, y0, x1 - x0, y1 - y0);
            }
        }
        out.push_str("</g>\n");
    }
    let items: Vec<(&str, &str)> = groups.iter().map(|g| (g.label.as_str(), g.color.as_str())).collect();
    legend(&mut out, &items);
    out.push_str("</svg>\n");
    out
}

/// Reads a `year,<a>,<b>` table into column labels and per-column points.
pub fn parse_series(text: &str) -> Result<(Vec<String>, Vec<Vec<(f64, f64)>>)> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let labels: Vec<String> = reader.headers()?.iter().skip(1).map(str::to_owned).collect();
    let mut cols = vec![Vec::new(); labels.len()];
    for row in reader.records() {
        let row = row.context("parsing series table")?;
        let x: f64 = row[0].parse().with_context(|| format!("bad x value `{}`", &row[0]))?;
        for (k, col) in cols.iter_mut().enumerate() {
            let y: f64 = row[k + 1].parse().with_context(|| format!("bad y value `{}`", &row[k + 1]))?;
            col.push((x, y));
        }
    }
    Ok((labels, cols))
}

/// Reads a `group,bin_lo,bin_hi,count` table into shared edges and counts.
pub fn parse_histogram(text: &str) -> Result<(Vec<f64>, Vec<(String, Vec<u64>)>)> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut edges: Vec<f64> = Vec::new();
    let mut groups: Vec<(String, Vec<u64>)> = Vec::new();
    for row in reader.records() {
        let row = row.context("parsing histogram table")?;
        let (lo, hi): (f64, f64) = (row[1].parse()?, row[2].parse()?);
        let count: u64 = row[3].parse()?;
        if groups.last().is_none_or(|g| g.0 != row[0]) {
            groups.push((row[0].to_owned(), Vec::new()));
        }
        let g = groups.last_mut().expect("pushed above");
        let bin = g.1.len();
        if groups.len() == 1 {
            if bin == 0 {
                edges.push(lo);
            }
            edges.push(hi);
        } else if edges.get(bin) != Some(&lo) || edges.get(bin + 1) != Some(&hi) {
            bail!("histogram groups do not share bin edges");
        }
        groups.last_mut().expect("pushed above").1.push(count);
    }
    Ok((edges, groups))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_table_roundtrip() {
        let text = "group,bin_lo,bin_hi,count\na,0,1,2\na,1,2,3\nb,0,1,0\nb,1,2,5\n# a n=5\n";
        let (edges, groups) = parse_histogram(text).unwrap();
        assert_eq!(edges, vec![0.0, 1.0, 2.0]);
        assert_eq!(groups, vec![("a".into(), vec![2, 3]), ("b".into(), vec![0, 5])]);
        let svg = density_chart("t", "x", &edges, &[HistGroup { label: "a".into(), color: "red".into(), counts: vec![2, 3] }]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn series_table_roundtrip() {
        let (labels, cols) = parse_series("year,cohort,control\n2000,0.5,0.25\n2001,1,0.5\n").unwrap();
        assert_eq!(labels, vec!["cohort", "control"]);
        assert_eq!(cols[1], vec![(2000.0, 0.25), (2001.0, 0.5)]);
    }
}
