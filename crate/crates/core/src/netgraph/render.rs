use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{CoAuthorNetwork, NetworkError};
use crate::ids::AuthorId;

/// Figure styling. Parsed from `key=value` pairs separated by commas.
#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    /// Group color tag, used for nodes and chords.
    pub color: String,
    /// Canvas width and height in pixels.
    pub size: u32,
    pub node_radius: f64,
    pub labels: bool,
    pub title: Option<String>,
}

impl Default for Style {
    fn default() -> Self {
        Style { color: "#b03a2e".to_owned(), size: 640, node_radius: 4.0, labels: false, title: None }
    }
}

impl Style {
    pub fn parse(spec: &str) -> Result<Style, NetworkError> {
        let mut style = Style::default();
        for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| NetworkError::UnsupportedStyle(pair.to_owned()))?;
            let bad = || NetworkError::BadStyleValue { key: key.to_owned(), value: value.to_owned() };
            match key {
                "color" => {
                    if value.is_empty() || value.contains(['"', '<', '>']) {
                        return Err(bad());
                    }
                    style.color = value.to_owned();
                }
                "size" => style.size = value.parse().ok().filter(|&s| s >= 64).ok_or_else(bad)?,
                "node_radius" => style.node_radius = value.parse().ok().filter(|r: &f64| *r > 0.0).ok_or_else(bad)?,
                "labels" => style.labels = value.parse().map_err(|_| bad())?,
                "title" => style.title = Some(value.to_owned()),
                other => return Err(NetworkError::UnsupportedStyle(other.to_owned())),
            }
        }
        Ok(style)
    }
}

/// A node placed on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePosition {
    pub id: AuthorId,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chord {
    pub a: usize,
    pub b: usize,
    pub weight: u64,
    pub opacity: f64,
}

/// Circular layout: node `k` of `n` sits at angle `2πk/n` measured clockwise
/// from 12 o'clock, in ascending id order. Positions depend only on the node
/// list, never on the edges.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutFigure {
    pub positions: Vec<NodePosition>,
    pub chords: Vec<Chord>,
    pub style: Style,
    pub cutoff_year: i32,
}

pub fn circular_layout(net: &CoAuthorNetwork, style: &Style) -> LayoutFigure {
    let n = net.nodes.len().max(1) as f64;
    let positions = net
        .nodes
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let theta = 2.0 * PI * k as f64 / n;
            NodePosition { id: id.clone(), x: theta.sin(), y: theta.cos() }
        })
        .collect();
    let max_w = net.edges.values().map(|e| e.weight()).max().unwrap_or(1);
    let chords = net
        .edges
        .iter()
        .map(|(&(a, b), e)| {
            let w = e.weight();
            let scaled = (1.0 + w as f64).ln() / (1.0 + max_w as f64).ln();
            Chord { a, b, weight: w, opacity: 0.15 + 0.85 * scaled }
        })
        .collect();
    LayoutFigure { positions, chords, style: style.clone(), cutoff_year: net.cutoff_year }
}

impl LayoutFigure {
    /// Standalone SVG. Each node carries its unit-circle coordinates in
    /// `data-x`/`data-y`.
    pub fn to_svg(&self) -> String {
        let size = self.style.size as f64;
        let c = size / 2.0;
        let r = size / 2.0 - 40.0;
        let px = |p: &NodePosition| (c + r * p.x, c - r * p.y);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
            self.style.size
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        if let Some(t) = &self.style.title {
            let _ = writeln!(s, r#"<text x="{c:.3}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#, xml_escape(t));
        }
        let _ = writeln!(s, r#"<g class="chords" stroke="{}" stroke-width="1">"#, self.style.color);
        for ch in &self.chords {
            let (x1, y1) = px(&self.positions[ch.a]);
            let (x2, y2) = px(&self.positions[ch.b]);
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke-opacity="{:.4}" data-weight="{}"/>"#,
                ch.opacity, ch.weight
            );
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, r#"<g class="nodes" fill="{}">"#, self.style.color);
        for p in &self.positions {
            let (x, y) = px(p);
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" data-id="{}" data-x="{:.12}" data-y="{:.12}"/>"#,
                self.style.node_radius,
                xml_escape(p.id.as_str()),
                p.x,
                p.y
            );
            if self.style.labels {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="8" text-anchor="middle">{}</text>"#,
                    c + (r + 14.0) * p.x,
                    c - (r + 14.0) * p.y,
                    xml_escape(p.id.as_str())
                );
            }
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, "</svg>");
        s
    }
}

/// Lays out and serializes a network in one step.
pub fn render_circular(net: &CoAuthorNetwork, style: &Style) -> (LayoutFigure, String) {
    let fig = circular_layout(net, style);
    let svg = fig.to_svg();
    (fig, svg)
}

pub(crate) fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
