mod common;

use std::collections::{BTreeMap, BTreeSet};

use convene::corpus::{Corpus, PublicationRecord, Sector};
use convene::metrics::{
    author_level_panels, group_publication_set, panel, BaselineTable, Metric, Overlap, PublicationSet,
};
use convene::{AuthorId, YearRange};
use proptest::prelude::*;

const ALL_YEARS: YearRange = YearRange { from: 1990, to: 2030 };

/// Baseline of one record recomputed from scratch: its own cell if that cell
/// has five or more records, otherwise the pooled sparse cells of its
/// (year, doctype), otherwise the pooled sparse cells of its year.
fn brute_baseline(corpus: &Corpus, r: &PublicationRecord) -> (f64, u64) {
    let cell = |x: &PublicationRecord| (x.field.clone(), x.year, x.doctype);
    let size = |x: &PublicationRecord| corpus.records().iter().filter(|y| cell(y) == cell(x)).count();
    let sparse = |x: &PublicationRecord| size(x) < 5;
    let pick: Vec<u64> = if !sparse(r) {
        corpus.records().iter().filter(|y| cell(y) == cell(r)).map(|y| y.citations).collect()
    } else {
        let yd: Vec<&PublicationRecord> =
            corpus.records().iter().filter(|y| y.year == r.year && y.doctype == r.doctype && sparse(y)).collect();
        if yd.len() >= 5 {
            yd.iter().map(|y| y.citations).collect()
        } else {
            // sparse cells whose (year, doctype) pool is itself sparse
            corpus
                .records()
                .iter()
                .filter(|y| {
                    y.year == r.year
                        && sparse(y)
                        && corpus.records().iter().filter(|z| z.year == y.year && z.doctype == y.doctype && sparse(z)).count() < 5
                })
                .map(|y| y.citations)
                .collect()
        }
    };
    let mean = pick.iter().sum::<u64>() as f64 / pick.len() as f64;
    let mut sorted = pick.clone();
    sorted.sort();
    let rank = ((0.99 * sorted.len() as f64 - 1e-9).ceil() as usize).max(1);
    (mean, sorted[rank - 1])
}

fn brute_panel(corpus: &Corpus, eids: &BTreeSet<convene::Eid>) -> [f64; 14] {
    let recs: Vec<&PublicationRecord> = corpus.records().iter().filter(|r| eids.contains(&r.eid)).collect();
    let n = recs.len() as f64;
    let mut v = [0.0; 14];
    let fw = |r: &PublicationRecord| {
        let (m, _) = brute_baseline(corpus, r);
        if m == 0.0 { 1.0 } else { r.citations as f64 / m }
    };
    v[0] = recs.iter().map(|r| r.citations as f64).sum();
    v[1] = v[0] / n;
    v[2] = 100.0 * recs.iter().filter(|r| r.citations > 0).count() as f64 / n;
    v[3] = recs.iter().map(|r| fw(r)).sum::<f64>() / n;
    v[4] = recs.iter().filter(|r| r.citations >= brute_baseline(corpus, r).1).count() as f64;
    let known_c: Vec<_> = recs.iter().filter(|r| !r.countries.is_empty()).collect();
    let intl: Vec<_> = known_c.iter().filter(|r| r.countries.len() >= 2).collect();
    v[5] = if known_c.is_empty() { 0.0 } else { 100.0 * intl.len() as f64 / known_c.len() as f64 };
    v[6] = if intl.is_empty() { 0.0 } else { intl.iter().map(|r| r.citations as f64).sum::<f64>() / intl.len() as f64 };
    let known_s: Vec<_> = recs.iter().filter(|r| !r.sectors.is_empty()).collect();
    let ac: Vec<_> = known_s
        .iter()
        .filter(|r| r.sectors.contains(&Sector::Academic) && r.sectors.contains(&Sector::Corporate))
        .collect();
    v[7] = if known_s.is_empty() { 0.0 } else { 100.0 * ac.len() as f64 / known_s.len() as f64 };
    v[8] = if ac.is_empty() { 0.0 } else { ac.iter().map(|r| r.citations as f64).sum::<f64>() / ac.len() as f64 };
    v[9] = recs.iter().map(|r| r.patent_citations as f64).sum();
    v[10] = recs.iter().map(|r| r.policy_citations as f64).sum();
    v[11] = recs.iter().map(|r| r.blog_mentions as f64).sum();
    v[12] = recs.iter().map(|r| r.news_mentions as f64).sum();
    v[13] = recs.iter().map(|r| r.tweet_mentions as f64).sum();
    v
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn panel_matches_brute_force(seed in any::<u64>(), n in 12usize..150, k in 1usize..8) {
        let corpus = common::random_corpus(seed, 20, n, 4);
        let baselines = BaselineTable::build(&corpus, ALL_YEARS);
        let members = common::ids(0..k);
        let set = group_publication_set(&corpus, "g", &members, None);
        prop_assume!(!set.is_empty());
        let p = panel(&set, &corpus, &baselines).unwrap();
        let want = brute_panel(&corpus, &set.eids);
        for (m, w) in Metric::ALL.iter().zip(want) {
            let got = p.get(*m);
            if m.is_count() {
                prop_assert_eq!(got, w, "{}", m.name());
            } else {
                prop_assert!(close(got, w), "{}: {} vs {}", m.name(), got, w);
            }
        }
    }

    #[test]
    fn fwci_averages_to_one(seed in any::<u64>(), n in 1usize..300) {
        let corpus = common::random_corpus(seed, 40, n, 4);
        let baselines = BaselineTable::build(&corpus, ALL_YEARS);
        let all = PublicationSet {
            owner: "all".into(),
            level: convene::metrics::Level::Group,
            eids: corpus.records().iter().map(|r| r.eid.clone()).collect(),
        };
        let p = panel(&all, &corpus, &baselines).unwrap();
        prop_assert!((p.fwci - 1.0).abs() < 1e-9, "{}", p.fwci);
    }

    #[test]
    fn group_set_deduplicates(seed in any::<u64>(), n in 1usize..120, k in 1usize..10) {
        let corpus = common::random_corpus(seed, 15, n, 5);
        let members = common::ids(0..k);
        let set = group_publication_set(&corpus, "g", &members, None);
        let union: BTreeSet<_> = corpus.records().iter()
            .filter(|r| r.authors.iter().any(|a| members.contains(a)))
            .map(|r| r.eid.clone()).collect();
        prop_assert_eq!(&set.eids, &union);
        // adding a member whose records are already covered changes nothing
        let covered: Vec<AuthorId> = common::ids(0..15).into_iter()
            .filter(|a| !members.contains(a) && corpus.author_records(a).iter().all(|&i| union.contains(&corpus.records()[i].eid)))
            .collect();
        for a in covered {
            let mut bigger = members.clone();
            bigger.insert(a);
            prop_assert_eq!(&group_publication_set(&corpus, "g", &bigger, None).eids, &set.eids);
        }
    }

    #[test]
    fn counts_grow_with_the_set(seed in any::<u64>(), n in 2usize..120, k in 1usize..10) {
        let corpus = common::random_corpus(seed, 15, n, 5);
        let baselines = BaselineTable::build(&corpus, ALL_YEARS);
        let small = group_publication_set(&corpus, "s", &common::ids(0..k), None);
        let large = group_publication_set(&corpus, "l", &common::ids(0..k + 3), None);
        prop_assume!(!small.is_empty());
        let (a, b) = (panel(&small, &corpus, &baselines).unwrap(), panel(&large, &corpus, &baselines).unwrap());
        for m in Metric::ALL.into_iter().filter(|m| m.is_count()) {
            prop_assert!(b.get(m) >= a.get(m), "{}", m.name());
        }
    }
}

#[test]
fn fully_shared_group_equals_each_author() {
    let records: Vec<PublicationRecord> = common::random_records(5, 4, 40, 1)
        .into_iter()
        .map(|mut r| {
            r.authors = common::ids(0..4).into_iter().collect();
            r
        })
        .collect();
    let corpus = Corpus::from_records(records).unwrap();
    let baselines = BaselineTable::build(&corpus, ALL_YEARS);
    let members = common::ids(0..4);
    let group = panel(&group_publication_set(&corpus, "g", &members, None), &corpus, &baselines).unwrap();
    let authors: BTreeMap<_, _> = author_level_panels(&corpus, &members, &baselines).unwrap();
    for p in authors.values() {
        assert_eq!(p, &group);
    }
}

#[test]
fn overlap_percent() {
    let set = |range: std::ops::Range<usize>| PublicationSet {
        owner: "x".into(),
        level: convene::metrics::Level::Group,
        eids: range.map(|i| convene::Eid::new(format!("E{i}"))).collect(),
    };
    let o = Overlap::of(&set(0..60), &set(45..100));
    assert_eq!((o.shared, o.union), (15, 100));
    assert_eq!(o.percent(), 15.0);
}
