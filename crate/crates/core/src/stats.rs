//! Small descriptive-statistics toolkit: moments, quantiles, nearest-rank
//! percentiles and shared-edge histograms.

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Population variance (divides by n).
pub fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Nearest-rank percentile: the value at 1-based rank `ceil(p * n)` of the
/// ascending sample, with rank clamped to `[1, n]`. `p` in `[0, 1]`.
pub fn nearest_rank<T: Copy + Ord>(sorted: &[T], p: f64) -> Option<T> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    let rank = nearest_rank_index(n, p);
    Some(sorted[rank - 1])
}

/// 1-based nearest rank for a sample of size `n`.
pub fn nearest_rank_index(n: usize, p: f64) -> usize {
    // 0.99 * 100 is 98.99999999999999 in binary; snap before taking ceil.
    let raw = p * n as f64;
    let snapped = (raw * 1e9).round() / 1e9;
    (snapped.ceil() as usize).clamp(1, n.max(1))
}

/// Linear-interpolation quantile (Hyndman-Fan type 7) of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * q;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Five-number summary plus count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Summary {
            n: v.len(),
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

/// How histogram bin edges are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Binning {
    Fixed(usize),
    FreedmanDiaconis,
}

impl Default for Binning {
    fn default() -> Self {
        Binning::Fixed(40)
    }
}

/// One labelled row set of a histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramGroup {
    pub label: String,
    pub counts: Vec<u64>,
    pub summary: Option<Summary>,
}

/// Histogram with bin edges shared by every group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub groups: Vec<HistogramGroup>,
}

impl Histogram {
    /// Builds a histogram whose edges span the union of all groups' values.
    /// Bins are half-open `[lo, hi)` except the last, which is closed.
    pub fn build(groups: &[(String, Vec<f64>)], binning: Binning) -> Histogram {
        let all: Vec<f64> = groups.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        let edges = shared_edges(&all, binning);
        let nbins = edges.len() - 1;
        let lo = edges[0];
        let hi = edges[nbins];
        let width = (hi - lo) / nbins as f64;
        let groups = groups
            .iter()
            .map(|(label, values)| {
                let mut counts = vec![0u64; nbins];
                for &x in values {
                    let mut b = ((x - lo) / width).floor() as isize;
                    if b >= nbins as isize {
                        b = nbins as isize - 1;
                    }
                    counts[b.max(0) as usize] += 1;
                }
                HistogramGroup {
                    label: label.clone(),
                    counts,
                    summary: Summary::of(values),
                }
            })
            .collect();
        Histogram { edges, groups }
    }

    pub fn bin_of(&self, x: f64) -> usize {
        let nbins = self.edges.len() - 1;
        let width = (self.edges[nbins] - self.edges[0]) / nbins as f64;
        (((x - self.edges[0]) / width).floor().max(0.0) as usize).min(nbins - 1)
    }

    /// Delimited text: `group,bin_lo,bin_hi,count` rows followed by one
    /// `#` comment line of summary statistics per group.
    pub fn to_delimited(&self) -> String {
        let mut out = String::from("group,bin_lo,bin_hi,count\n");
        for g in &self.groups {
            for (i, c) in g.counts.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    csv_field(&g.label),
                    self.edges[i],
                    self.edges[i + 1],
                    c
                ));
            }
        }
        for g in &self.groups {
            match &g.summary {
                Some(s) => out.push_str(&format!(
                    "# {} n={} min={} q1={} median={} q3={} max={}\n",
                    g.label, s.n, s.min, s.q1, s.median, s.q3, s.max
                )),
                None => out.push_str(&format!("# {} n=0\n", g.label)),
            }
        }
        out
    }
}

fn shared_edges(values: &[f64], binning: Binning) -> Vec<f64> {
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let nbins = match binning {
        Binning::Fixed(n) => n.max(1),
        Binning::FreedmanDiaconis => {
            let mut v = values.to_vec();
            v.sort_by(f64::total_cmp);
            let iqr = if v.is_empty() {
                0.0
            } else {
                quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25)
            };
            let h = 2.0 * iqr / (v.len().max(1) as f64).cbrt();
            if h > 0.0 {
                (((hi - lo) / h).ceil() as usize).clamp(1, 10_000)
            } else {
                1
            }
        }
    };
    let width = (hi - lo) / nbins as f64;
    let mut edges: Vec<f64> = (0..nbins).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    edges
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_matches_definition() {
        let v: Vec<u64> = (0..100).collect();
        assert_eq!(nearest_rank_index(100, 0.99), 99);
        assert_eq!(nearest_rank(&v, 0.99), Some(98));
        assert_eq!(nearest_rank(&[10u64], 0.99), Some(10));
        assert_eq!(nearest_rank_index(1000, 0.99), 990);
        assert_eq!(nearest_rank_index(101, 0.99), 100);
    }

    #[test]
    fn variances() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((sample_variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!((population_variance(&xs) - 1.25).abs() < 1e-15);
        assert_eq!(sample_variance(&[3.0]), 0.0);
    }

    #[test]
    fn single_value_histogram() {
        let h = Histogram::build(&[("g".into(), vec![7.0])], Binning::Fixed(40));
        let occupied: Vec<_> = h.groups[0].counts.iter().filter(|&&c| c > 0).collect();
        assert_eq!(occupied.len(), 1);
        assert_eq!(h.groups[0].summary.as_ref().unwrap().median, 7.0);
    }

    #[test]
    fn max_value_lands_in_last_bin() {
        let h = Histogram::build(&[("g".into(), vec![0.0, 10.0])], Binning::Fixed(10));
        assert_eq!(h.groups[0].counts[0], 1);
        assert_eq!(h.groups[0].counts[9], 1);
        assert_eq!(h.edges.len(), 11);
    }

    #[test]
    fn quartiles_interpolate() {
        let s = Summary::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max), (1.0, 1.75, 2.5, 3.25, 4.0));
    }
}
