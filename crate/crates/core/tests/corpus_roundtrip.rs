mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Cursor;

use convene::corpus::{read_corpus, write_corpus, load_corpus, Corpus, CorpusError, ValidationOptions};
use convene::{AuthorId, Eid};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn strict() -> ValidationOptions {
    ValidationOptions { lenient: false, max_year: 2030 }
}

/// Author index rebuilt by scanning every record.
fn scan_index(corpus: &Corpus) -> BTreeMap<AuthorId, BTreeSet<Eid>> {
    let mut idx: BTreeMap<AuthorId, BTreeSet<Eid>> = BTreeMap::new();
    for r in corpus.records() {
        for a in &r.authors {
            idx.entry(a.clone()).or_default().insert(r.eid.clone());
        }
    }
    idx
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_roundtrip_is_identity(seed in any::<u64>(), n in 1usize..80) {
        let corpus = common::random_corpus(seed, 20, n, 5);
        let (back, report) = read_corpus(Cursor::new(corpus.to_jsonl()), &strict()).unwrap();
        prop_assert!(report.is_clean());
        prop_assert_eq!(&back, &corpus);
        prop_assert_eq!(back.to_jsonl(), corpus.to_jsonl());
    }

    #[test]
    fn input_order_does_not_matter(seed in any::<u64>(), n in 1usize..80) {
        let mut records = common::random_records(seed, 20, n, 5);
        let a = Corpus::from_records(records.clone()).unwrap();
        records.shuffle(&mut common::rng(seed ^ 0x5eed));
        let mut lines: Vec<String> = records.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
        lines.shuffle(&mut common::rng(seed.wrapping_add(7)));
        let (b, _) = read_corpus(Cursor::new(lines.join("\n")), &strict()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn author_index_matches_scan(seed in any::<u64>(), n in 0usize..80) {
        let corpus = common::random_corpus(seed, 25, n, 6);
        prop_assert!(corpus.index_is_consistent());
        prop_assert_eq!(corpus.author_index(), scan_index(&corpus));
    }
}

#[test]
fn file_roundtrip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    let corpus = common::random_corpus(11, 30, 120, 5);
    write_corpus(&corpus, &path).unwrap();
    let (back, report) = load_corpus(&path, &strict()).unwrap();
    assert_eq!(back, corpus);
    assert_eq!(report.accepted, 120);
}

#[test]
fn duplicate_eid_names_both_lines() {
    let corpus = common::random_corpus(3, 10, 3, 3);
    let mut text = corpus.to_jsonl();
    let first = text.lines().next().unwrap().to_owned();
    text.push_str(&first);
    text.push('\n');
    match read_corpus(Cursor::new(text), &strict()) {
        Err(CorpusError::DuplicateEid { first_line, second_line, .. }) => {
            assert_eq!((first_line, second_line), (1, 4));
        }
        other => panic!("expected duplicate eid error, got {other:?}"),
    }
}
