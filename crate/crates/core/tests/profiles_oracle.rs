mod common;

use std::collections::BTreeSet;

use convene::corpus::{CohortSpec, Corpus};
use convene::profiles::{coauthor_pool, derive_profiles, AuthorProfile, ProfileParts};
use convene::AuthorId;
use proptest::prelude::*;

/// Recounts one profile with nested loops over the raw record list.
fn brute_profile(corpus: &Corpus, a: &AuthorId) -> Option<AuthorProfile> {
    let mut first = None::<i32>;
    let (mut output, mut cites) = (0u64, 0u64);
    let mut coauthors = BTreeSet::new();
    for r in corpus.records() {
        if r.authors.iter().any(|x| x == a) {
            first = Some(first.map_or(r.year, |f| f.min(r.year)));
            output += 1;
            cites += r.citations;
            for x in &r.authors {
                if x != a {
                    coauthors.insert(x.clone());
                }
            }
        }
    }
    Some(AuthorProfile {
        author: a.clone(),
        first_pub_year: first?,
        scholarly_output: output,
        coauthor_count: coauthors.len() as u64,
        citation_total: cites,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profiles_match_brute_force(seed in any::<u64>(), n in 1usize..120) {
        let corpus = common::random_corpus(seed, 30, n, 6);
        // ask for a few ids that never publish as well
        let wanted = common::ids(0..35);
        let set = derive_profiles(&corpus, &wanted);
        for a in &wanted {
            prop_assert_eq!(set.get(a).cloned(), brute_profile(&corpus, a));
        }
        let missing: BTreeSet<_> = set.missing.iter().cloned().collect();
        let expected: BTreeSet<_> = wanted.iter().filter(|a| !corpus.contains_author(a)).cloned().collect();
        prop_assert_eq!(missing, expected);
    }

    #[test]
    fn profile_parts_are_additive(seed in any::<u64>(), n in 2usize..80, split in 0usize..80) {
        let corpus = common::random_corpus(seed, 12, n, 4);
        for a in corpus.authors() {
            let records: Vec<_> = corpus.author_records(a).iter().map(|&i| &corpus.records()[i]).collect();
            let cut = split.min(records.len());
            let whole = ProfileParts::collect(a, records.iter().copied()).unwrap().finish(a.clone());
            let merged = match (
                ProfileParts::collect(a, records[..cut].iter().copied()),
                ProfileParts::collect(a, records[cut..].iter().copied()),
            ) {
                (Some(x), Some(y)) => x.merge(y),
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => unreachable!("author has records"),
            };
            prop_assert_eq!(merged.finish(a.clone()), whole);
        }
    }

    #[test]
    fn pool_is_disjoint_and_connected(seed in any::<u64>(), n in 5usize..120) {
        let corpus = common::random_corpus(seed, 30, n, 5);
        let members: BTreeSet<AuthorId> = common::ids(0..6).into_iter().filter(|a| corpus.contains_author(a)).collect();
        prop_assume!(!members.is_empty());
        let cohort = CohortSpec { name: "c".into(), members: members.clone(), program_start_year: 2005 };
        match coauthor_pool(&corpus, &cohort) {
            Ok(pool) => {
                prop_assert!(pool.candidates.is_disjoint(&members));
                for c in &pool.candidates {
                    let shared = corpus.records().iter()
                        .filter(|r| r.authors.contains(c) && r.authors.iter().any(|a| members.contains(a)))
                        .count() as u64;
                    prop_assert_eq!(pool.provenance[c], shared);
                }
                let brute: BTreeSet<AuthorId> = corpus.records().iter()
                    .filter(|r| r.authors.iter().any(|a| members.contains(a)))
                    .flat_map(|r| r.authors.iter().cloned())
                    .filter(|a| !members.contains(a))
                    .collect();
                prop_assert_eq!(pool.candidates, brute);
            }
            Err(e) => prop_assert_eq!(e.to_string(), "cohort has no external co-authors"),
        }
    }
}
