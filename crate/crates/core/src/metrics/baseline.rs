//! Expected-citation baselines per (field, year, doctype) cell.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::corpus::{Corpus, DocType, PublicationRecord};
use crate::ids::YearRange;
use crate::stats::nearest_rank;

/// Cells smaller than this are served by a pooled fallback baseline.
pub const MIN_CELL_SIZE: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub field: String,
    pub year: i32,
    pub doctype: DocType,
}

impl CellKey {
    pub fn of(r: &PublicationRecord) -> CellKey {
        CellKey { field: r.field.clone(), year: r.year, doctype: r.doctype }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub mean: f64,
    /// 99th percentile of citations, nearest-rank method.
    pub p99: u64,
    pub n: usize,
}

impl CellStats {
    fn from_citations(mut c: Vec<u64>) -> CellStats {
        c.sort_unstable();
        let n = c.len();
        let mean = c.iter().sum::<u64>() as f64 / n as f64;
        CellStats { mean, p99: nearest_rank(&c, 0.99).expect("non-empty cell"), n }
    }
}

/// Which level of the fallback chain serves a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineLevel {
    /// The (field, year, doctype) cell itself.
    Cell,
    /// Pooled sparse cells sharing (year, doctype).
    YearDoctype,
    /// Pooled sparse cells sharing the year.
    Year,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub stats: CellStats,
    pub level: BaselineLevel,
}

/// Per-cell citation baselines over a reference window.
///
/// Cells with at least [`MIN_CELL_SIZE`] records serve themselves. Sparse
/// cells are pooled with the other sparse cells of the same (year, doctype);
/// if that pool is still sparse it is pooled again at the year level. Every
/// record therefore belongs to exactly one effective baseline group, so the
/// mean FWCI over the reference corpus is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineTable {
    pub window: YearRange,
    cells: BTreeMap<CellKey, CellStats>,
    routes: BTreeMap<CellKey, BaselineLevel>,
    year_doctype: BTreeMap<(i32, DocType), CellStats>,
    year: BTreeMap<i32, CellStats>,
    year_all: BTreeMap<i32, CellStats>,
}

impl BaselineTable {
    /// Builds baselines from every corpus record inside `window`.
    pub fn build(corpus: &Corpus, window: YearRange) -> BaselineTable {
        let mut by_cell: BTreeMap<CellKey, Vec<u64>> = BTreeMap::new();
        let mut by_year: BTreeMap<i32, Vec<u64>> = BTreeMap::new();
        for r in corpus.records().iter().filter(|r| window.contains(r.year)) {
            by_cell.entry(CellKey::of(r)).or_default().push(r.citations);
            by_year.entry(r.year).or_default().push(r.citations);
        }

        let mut routes = BTreeMap::new();
        let mut sparse_yd: BTreeMap<(i32, DocType), (Vec<CellKey>, Vec<u64>)> = BTreeMap::new();
        for (key, cits) in &by_cell {
            if cits.len() >= MIN_CELL_SIZE {
                routes.insert(key.clone(), BaselineLevel::Cell);
            } else {
                let e = sparse_yd.entry((key.year, key.doctype)).or_default();
                e.0.push(key.clone());
                e.1.extend(cits);
            }
        }
        let mut year_doctype = BTreeMap::new();
        let mut sparse_y: BTreeMap<i32, Vec<u64>> = BTreeMap::new();
        for ((y, d), (keys, cits)) in sparse_yd {
            if cits.len() >= MIN_CELL_SIZE {
                keys.into_iter().for_each(|k| {
                    routes.insert(k, BaselineLevel::YearDoctype);
                });
                year_doctype.insert((y, d), CellStats::from_citations(cits));
            } else {
                keys.into_iter().for_each(|k| {
                    routes.insert(k, BaselineLevel::Year);
                });
                sparse_y.entry(y).or_default().extend(cits);
            }
        }
        let year = sparse_y.into_iter().map(|(y, c)| (y, CellStats::from_citations(c))).collect();
        let year_all = by_year.into_iter().map(|(y, c)| (y, CellStats::from_citations(c))).collect();
        let cells = by_cell.into_iter().map(|(k, c)| (k, CellStats::from_citations(c))).collect();
        BaselineTable { window, cells, routes, year_doctype, year, year_all }
    }

    /// Raw statistics of one cell, regardless of the level that serves it.
    pub fn cell(&self, key: &CellKey) -> Option<&CellStats> {
        self.cells.get(key)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellKey, &CellStats)> {
        self.cells.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Number of disjoint record groups that serve as baselines.
    pub fn effective_groups(&self) -> usize {
        self.routes.values().filter(|l| **l == BaselineLevel::Cell).count() + self.year_doctype.len() + self.year.len()
    }

    /// Baseline serving `record`. Records from cells absent from the
    /// reference corpus fall back to all records of their year.
    pub fn resolve(&self, record: &PublicationRecord) -> Result<Resolved, MetricsError> {
        let key = CellKey::of(record);
        let found = match self.routes.get(&key) {
            Some(BaselineLevel::Cell) => self.cells.get(&key).map(|s| (*s, BaselineLevel::Cell)),
            Some(BaselineLevel::YearDoctype) => self
                .year_doctype
                .get(&(key.year, key.doctype))
                .map(|s| (*s, BaselineLevel::YearDoctype)),
            Some(BaselineLevel::Year) => self.year.get(&key.year).map(|s| (*s, BaselineLevel::Year)),
            None => self.year_all.get(&key.year).map(|s| (*s, BaselineLevel::Year)),
        };
        found
            .map(|(stats, level)| Resolved { stats, level })
            .ok_or_else(|| MetricsError::Unresolvable { eid: record.eid.clone(), year: record.year })
    }

    /// Delimited dump: `field,year,doctype,n,mean,p99,served_by`.
    pub fn to_delimited(&self) -> String {
        let mut out = String::from("field,year,doctype,n,mean,p99,served_by\n");
        for (k, s) in &self.cells {
            let level = match self.routes[k] {
                BaselineLevel::Cell => "cell",
                BaselineLevel::YearDoctype => "year_doctype",
                BaselineLevel::Year => "year",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                crate::stats::csv_field(&k.field),
                k.year,
                k.doctype.as_str(),
                s.n,
                s.mean,
                s.p99,
                level
            ));
        }
        out
    }
}

/// Field-weighted citation impact: citations over the expected citations of
/// the record's baseline. A zero baseline (only uncited records) gives 1.0.
pub fn fwci(record: &PublicationRecord, baselines: &BaselineTable) -> Result<f64, MetricsError> {
    let r = baselines.resolve(record)?;
    if r.stats.mean == 0.0 {
        if record.citations == 0 {
            Ok(1.0)
        } else {
            // only reachable for records foreign to the reference corpus
            Err(MetricsError::Unresolvable { eid: record.eid.clone(), year: record.year })
        }
    } else {
        Ok(record.citations as f64 / r.stats.mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize, field: &str, year: i32, cites: u64) -> PublicationRecord {
        let mut r = PublicationRecord::new(format!("e{i:04}"), year, &["A"], cites);
        r.field = field.to_owned();
        r
    }

    #[test]
    fn singleton_cell() {
        let c = Corpus::from_records(vec![rec(0, "F", 2000, 10)]).unwrap();
        let b = BaselineTable::build(&c, YearRange::new(2000, 2000));
        let s = b.cell(&CellKey::of(&c.records()[0])).unwrap();
        assert_eq!((s.mean, s.p99, s.n), (10.0, 10, 1));
    }

    #[test]
    fn hundred_record_cell() {
        let c = Corpus::from_records((0..100).map(|i| rec(i, "F", 2000, i as u64)).collect()).unwrap();
        let b = BaselineTable::build(&c, YearRange::new(2000, 2000));
        let r = b.resolve(&c.records()[0]).unwrap();
        assert_eq!(r.level, BaselineLevel::Cell);
        assert_eq!(r.stats.mean, 49.5);
        // rank ceil(0.99 * 100) = 99 of the ascending values 0..=99
        assert_eq!(r.stats.p99, 98);
    }

    #[test]
    fn sparse_cell_falls_back_to_year_doctype() {
        let mut recs: Vec<_> = (0..3).map(|i| rec(i, "SPARSE", 2000, 3)).collect();
        recs.extend((3..6).map(|i| rec(i, "OTHER", 2000, 6)));
        recs.extend((6..16).map(|i| rec(i, "DENSE", 2000, 1)));
        let c = Corpus::from_records(recs).unwrap();
        let b = BaselineTable::build(&c, YearRange::new(2000, 2000));
        let sparse = c.records().iter().find(|r| r.field == "SPARSE").unwrap();
        let r = b.resolve(sparse).unwrap();
        assert_eq!(r.level, BaselineLevel::YearDoctype);
        assert_eq!((r.stats.n, r.stats.mean), (6, 4.5));
        let dense = c.records().iter().find(|r| r.field == "DENSE").unwrap();
        assert_eq!(b.resolve(dense).unwrap().level, BaselineLevel::Cell);
    }

    #[test]
    fn very_sparse_year_pools_at_year_level() {
        let mut recs: Vec<_> = (0..2).map(|i| rec(i, "X", 2000, 3)).collect();
        let mut review = rec(2, "Y", 2000, 9);
        review.doctype = DocType::Review;
        recs.push(review);
        let c = Corpus::from_records(recs).unwrap();
        let b = BaselineTable::build(&c, YearRange::new(2000, 2000));
        let r = b.resolve(&c.records()[2]).unwrap();
        assert_eq!((r.level, r.stats.n, r.stats.mean), (BaselineLevel::Year, 3, 5.0));
    }

    #[test]
    fn fwci_at_mean_is_one_and_uncited_cell_is_one() {
        let c = Corpus::from_records(vec![rec(0, "F", 2000, 4), rec(1, "F", 2000, 0), rec(2, "G", 2001, 0)]).unwrap();
        let b = BaselineTable::build(&c, YearRange::new(2000, 2001));
        assert_eq!(fwci(&c.records()[2], &b).unwrap(), 1.0);
        let mut at_mean = rec(9, "F", 2000, 2);
        at_mean.eid = "x".into();
        assert_eq!(fwci(&at_mean, &b).unwrap(), 1.0);
    }

    #[test]
    fn outside_window_is_unresolvable() {
        let c = Corpus::from_records(vec![rec(0, "F", 2000, 4)]).unwrap();
        let b = BaselineTable::build(&c, YearRange::new(2001, 2002));
        assert!(b.is_empty());
        assert!(matches!(fwci(&c.records()[0], &b), Err(MetricsError::Unresolvable { .. })));
    }
}
