use std::collections::BTreeSet;
use std::io::Cursor;

use convene::corpus::{read_corpus, ValidationOptions};
use convene::netgraph::{build_network, density};
use convene::synthlab::{author_id, expected_stats, generate, SynthConfig};
use convene::{AuthorId, YearRange};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(seed: u64, boost: f64) -> SynthConfig {
    SynthConfig {
        n_authors: 120,
        n_cohort: 12,
        years: YearRange::new(2001, 2020),
        program_start_year: 2011,
        base_collab_prob: 0.01,
        cohort_boost: boost,
        pubs_per_author_year: 0.5,
        stagger_years: 0,
        seed,
        ..SynthConfig::default()
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

fn within_3se(xs: &[f64], expected: f64) -> bool {
    let (m, sd) = mean_sd(xs);
    let se = sd / (xs.len() as f64).sqrt();
    eprintln!("mean {m:.6} expected {expected:.6} se {se:.6}");
    (m - expected).abs() <= 3.0 * se
}

#[test]
fn generated_corpus_validates_cleanly() {
    let out = generate(&SynthConfig { n_authors: 150, ..SynthConfig::default() }).unwrap();
    let opts = ValidationOptions { lenient: false, max_year: 2030 };
    let (back, report) = read_corpus(Cursor::new(out.corpus.to_jsonl()), &opts).unwrap();
    assert!(report.is_clean(), "{report}");
    assert!(report.missing_counters.is_empty());
    assert_eq!(back, out.corpus);
    assert!(out.cohort.check_against(&back).unwrap().is_empty());
    let firsts: BTreeSet<i32> = convene::profiles::derive_profiles(&back, &back.authors().cloned().collect())
        .profiles
        .values()
        .map(|p| p.first_pub_year)
        .collect();
    assert!(firsts.len() > 5, "first publication years should vary: {firsts:?}");
}

#[test]
fn publication_total_matches_poisson_mean() {
    let cfg = config(0, 3.0);
    let expected = expected_stats(&cfg).unwrap();
    assert_eq!(expected.publications, 120.0 * 20.0 * 0.5);
    let totals: Vec<f64> = (0..200).map(|s| generate(&config(s, 3.0)).unwrap().corpus.len() as f64).collect();
    assert!(within_3se(&totals, expected.publications));
    let (_, sd) = mean_sd(&totals);
    assert!((sd / expected.publications_sd - 1.0).abs() < 0.25);
}

#[test]
fn staggered_publication_total_matches() {
    let cfg = SynthConfig { stagger_years: 8, ..config(0, 1.0) };
    let expected = expected_stats(&cfg).unwrap();
    let totals: Vec<f64> = (0..200)
        .map(|s| generate(&SynthConfig { seed: s, ..cfg.clone() }).unwrap().corpus.len() as f64)
        .collect();
    assert!(within_3se(&totals, expected.publications));
}

fn final_density(out: &convene::synthlab::SynthOutput, members: &BTreeSet<AuthorId>) -> f64 {
    build_network(&out.corpus, members, out.truth.config.years.to).map(|n| density(&n)).unwrap()
}

#[test]
fn pair_edge_probabilities_match_closed_form() {
    for boost in [1.0, 3.0] {
        let expected = expected_stats(&config(0, boost)).unwrap();
        let mut cohort = Vec::new();
        let mut background = Vec::new();
        for seed in 0..200 {
            let out = generate(&config(seed, boost)).unwrap();
            let planted: BTreeSet<AuthorId> = out.truth.planted_cohort.iter().cloned().collect();
            cohort.push(final_density(&out, &planted));
            let others: BTreeSet<AuthorId> = (0..120).map(author_id).filter(|a| !planted.contains(a)).collect();
            background.push(final_density(&out, &others));
        }
        assert!(within_3se(&cohort, expected.cohort_density().unwrap()), "cohort, boost {boost}");
        assert!(within_3se(&background, expected.background_density().unwrap()), "background, boost {boost}");
    }
}

/// Without a boost the cohort is an exchangeable subset: its pairs link at
/// the same rate as an equally sized random subset of the other authors.
#[test]
fn null_boost_is_indistinguishable() {
    let (mut x1, mut n1, mut x2, mut n2) = (0u64, 0u64, 0u64, 0u64);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..100 {
        let out = generate(&SynthConfig { stagger_years: 6, ..config(seed, 1.0) }).unwrap();
        let planted: BTreeSet<AuthorId> = out.truth.planted_cohort.iter().cloned().collect();
        let others: Vec<AuthorId> = (0..120).map(author_id).filter(|a| !planted.contains(a)).collect();
        let random: BTreeSet<AuthorId> = sample(&mut rng, others.len(), planted.len()).iter().map(|i| others[i].clone()).collect();
        let pairs = (planted.len() * (planted.len() - 1) / 2) as u64;
        let last = out.truth.config.years.to;
        x1 += build_network(&out.corpus, &planted, last).unwrap().edge_count() as u64;
        x2 += build_network(&out.corpus, &random, last).unwrap().edge_count() as u64;
        n1 += pairs;
        n2 += pairs;
    }
    let (p1, p2) = (x1 as f64 / n1 as f64, x2 as f64 / n2 as f64);
    let p = (x1 + x2) as f64 / (n1 + n2) as f64;
    let z = (p1 - p2) / (p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    eprintln!("cohort {p1:.4} random {p2:.4} z {z:.3}");
    assert!(z.abs() < 3.0);
}

#[test]
fn truth_manifest_recovers_planted_boost() {
    // boosted/unboosted per-year link rates among cohort pairs, recovered from
    // the corpus using only manifest information
    let cfg = SynthConfig { n_authors: 200, n_cohort: 40, base_collab_prob: 0.01, ..config(7, 3.0) };
    let (mut pre, mut post) = (0.0, 0.0);
    for seed in 0..40 {
        let out = generate(&SynthConfig { seed, ..cfg.clone() }).unwrap();
        let planted: BTreeSet<AuthorId> = out.truth.planted_cohort.iter().cloned().collect();
        for r in out.corpus.records() {
            let lead_in = planted.contains(&r.authors[0]);
            let joined = r.authors[1..].iter().filter(|a| planted.contains(a)).count() as f64;
            if lead_in {
                if r.year >= out.truth.program_start_year {
                    post += joined;
                } else {
                    pre += joined;
                }
            }
        }
    }
    // equal pre/post spans, so the ratio of cohort joins estimates the boost
    let ratio = post / pre;
    eprintln!("recovered boost {ratio:.3}");
    assert!((ratio - cfg.cohort_boost).abs() < 0.3);
}
