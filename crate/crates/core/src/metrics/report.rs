//! Two-group panel comparison in machine (delimited) and human (aligned
//! table) form.

use std::fmt::Write as _;

use super::{Metric, MetricsError, MetricsPanel};

/// Section headers of the human report and the metrics under each.
pub const SECTIONS: [(&str, &[Metric]); 3] = [
    (
        "Quality of Output",
        &[
            Metric::CitationCount,
            Metric::CitationsPerPublication,
            Metric::CitedPublicationsPct,
            Metric::Fwci,
            Metric::Top1pctCount,
        ],
    ),
    ("International Collaboration", &[Metric::IntlCollabPct, Metric::IntlCollabImpact]),
    (
        "Reach beyond Academia",
        &[
            Metric::AcadCorpPct,
            Metric::AcadCorpImpact,
            Metric::CitingPatents,
            Metric::PolicyCitations,
            Metric::BlogMentions,
            Metric::NewsMentions,
            Metric::Tweets,
        ],
    ),
];

/// Panels of two groups side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelComparison {
    pub label_a: String,
    pub label_b: String,
    pub a: MetricsPanel,
    pub b: MetricsPanel,
}

/// Integer with comma thousands separators.
pub fn format_count(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

fn format_human(m: Metric, v: f64) -> String {
    if m.is_count() {
        format_count(v as u64)
    } else if m == Metric::Fwci {
        format!("{v:.2}")
    } else {
        format!("{v:.1}")
    }
}

fn format_machine(m: Metric, v: f64) -> String {
    if m.is_count() {
        (v as u64).to_string()
    } else {
        v.to_string()
    }
}

impl PanelComparison {
    /// `metric,<a>,<b>` header then one row per metric.
    pub fn to_machine(&self) -> String {
        let mut out = format!("metric,{},{}\n", self.label_a, self.label_b);
        for m in Metric::ALL {
            let _ = writeln!(out, "{},{},{}", m.name(), format_machine(m, self.a.get(m)), format_machine(m, self.b.get(m)));
        }
        out
    }

    /// Parses the output of [`PanelComparison::to_machine`]. Notes and
    /// coverage are not part of the machine form and come back empty.
    pub fn from_machine(text: &str) -> Result<PanelComparison, MetricsError> {
        let bad = |m: String| MetricsError::Malformed(m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty panel table".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() != 3 || cols[0] != "metric" {
            return Err(bad(format!("unexpected header `{header}`")));
        }
        let mut out = PanelComparison {
            label_a: cols[1].to_owned(),
            label_b: cols[2].to_owned(),
            a: MetricsPanel::default(),
            b: MetricsPanel::default(),
        };
        let mut seen = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(bad(format!("expected 3 columns in `{line}`")));
            }
            let m: Metric = f[0].parse()?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("bad value `{s}` for {m}")));
            out.a.set(m, num(f[1])?);
            out.b.set(m, num(f[2])?);
            seen.push(m);
        }
        if let Some(m) = Metric::ALL.into_iter().find(|m| !seen.contains(m)) {
            return Err(bad(format!("missing metric {m}")));
        }
        Ok(out)
    }

    /// Aligned table grouped under the three section headers, followed by
    /// any coverage notes.
    pub fn to_human(&self) -> String {
        let label_w = Metric::ALL.iter().map(|m| m.label().len()).max().unwrap_or(0) + 2;
        let cells: Vec<(String, String)> = Metric::ALL
            .iter()
            .map(|&m| (format_human(m, self.a.get(m)), format_human(m, self.b.get(m))))
            .collect();
        let col_a = cells.iter().map(|c| c.0.len()).chain([self.label_a.len()]).max().unwrap_or(0) + 2;
        let col_b = cells.iter().map(|c| c.1.len()).chain([self.label_b.len()]).max().unwrap_or(0) + 2;

        let mut out = String::new();
        let _ = writeln!(out, "{:label_w$}{:>col_a$}{:>col_b$}", "", self.label_a, self.label_b);
        for (section, metrics) in SECTIONS {
            let _ = writeln!(out, "{section}");
            for &m in metrics {
                let i = Metric::ALL.iter().position(|&x| x == m).expect("listed metric");
                let _ = writeln!(out, "  {:w$}{:>col_a$}{:>col_b$}", m.label(), cells[i].0, cells[i].1, w = label_w - 2);
            }
        }
        let notes: Vec<String> = self
            .a
            .notes
            .iter()
            .map(|n| format!("{}: {n}", self.label_a))
            .chain(self.b.notes.iter().map(|n| format!("{}: {n}", self.label_b)))
            .collect();
        if !notes.is_empty() {
            let _ = writeln!(out, "Notes");
            for n in notes {
                let _ = writeln!(out, "  {n}");
            }
        }
        out
    }
}
