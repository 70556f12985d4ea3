#![allow(dead_code)]

use std::collections::BTreeSet;

use convene::corpus::{Corpus, DocType, PublicationRecord, Sector};
use convene::AuthorId;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn author(i: usize) -> AuthorId {
    AuthorId::new(format!("A{i:03}"))
}

/// Random record with up to `max_authors` distinct authors out of `n_authors`.
pub fn random_record(rng: &mut ChaCha8Rng, serial: usize, n_authors: usize, max_authors: usize, years: (i32, i32)) -> PublicationRecord {
    let k = rng.random_range(1..=max_authors.min(n_authors));
    let picked = rand::seq::index::sample(rng, n_authors, k);
    let mut r = PublicationRecord::new(format!("E{serial:06}"), rng.random_range(years.0..=years.1), &[], 0);
    r.authors = picked.iter().map(author).collect();
    r.citations = if rng.random_bool(0.2) { 0 } else { rng.random_range(0..200) };
    r.field = ["PHYS", "ASTR", "MATH"].choose(rng).unwrap().to_string();
    r.doctype = [DocType::Article, DocType::Review, DocType::Conference].choose(rng).copied().unwrap();
    if rng.random_bool(0.9) {
        r.countries.insert("CA".into());
        if rng.random_bool(0.4) {
            r.countries.insert("US".into());
        }
    }
    if rng.random_bool(0.85) {
        r.sectors.insert(Sector::Academic);
        if rng.random_bool(0.2) {
            r.sectors.insert(Sector::Corporate);
        }
    }
    r.patent_citations = rng.random_range(0..3);
    r.policy_citations = rng.random_range(0..2);
    r.blog_mentions = rng.random_range(0..4);
    r.news_mentions = rng.random_range(0..4);
    r.tweet_mentions = rng.random_range(0..30);
    r
}

pub fn random_records(seed: u64, n_authors: usize, n_records: usize, max_authors: usize) -> Vec<PublicationRecord> {
    let mut rng = rng(seed);
    (0..n_records).map(|i| random_record(&mut rng, i, n_authors, max_authors, (2000, 2015))).collect()
}

pub fn random_corpus(seed: u64, n_authors: usize, n_records: usize, max_authors: usize) -> Corpus {
    Corpus::from_records(random_records(seed, n_authors, n_records, max_authors)).unwrap()
}

pub fn ids(range: std::ops::Range<usize>) -> BTreeSet<AuthorId> {
    range.map(author).collect()
}
