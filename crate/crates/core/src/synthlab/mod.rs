//! Seeded synthetic corpora with a plantable convening intervention, and the
//! closed-form expectations used to check the generator itself.
//!
//! Model: each active author leads `Poisson(rate)` publications per year.
//! Every other active author joins a publication independently with
//! probability `base_collab_prob`; when the lead and the joiner are both
//! cohort members and the year is on or after the program start, the
//! probability is multiplied by `cohort_boost` (capped at 1).

mod config;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

pub use config::{FieldSpec, SynthConfig};

use crate::corpus::{CohortSpec, Corpus, DocType, PublicationRecord, Sector};
use crate::ids::{AuthorId, Eid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    Config(String),
    #[error("infeasible synth config: {0}")]
    Infeasible(String),
}

const COUNTRIES: [&str; 10] = ["CA", "US", "GB", "DE", "FR", "JP", "IT", "AU", "NL", "CH"];

/// Poisson means of the attention counters per publication.
const PATENT_RATE: f64 = 0.05;
const POLICY_RATE: f64 = 0.02;
const BLOG_RATE: f64 = 0.1;
const NEWS_RATE: f64 = 0.15;
const TWEET_RATE: f64 = 1.5;

/// Ground truth of one generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: SynthConfig,
    pub cohort_boost: f64,
    pub program_start_year: i32,
    /// Sampled cohort, including members who never published.
    pub planted_cohort: Vec<AuthorId>,
    /// Planted cohort members absent from the corpus (dropped from the cohort file).
    pub cohort_absent: Vec<AuthorId>,
    /// First active year of every author.
    pub career_start: BTreeMap<AuthorId, i32>,
    pub home_field: BTreeMap<AuthorId, String>,
    pub home_country: BTreeMap<AuthorId, String>,
    pub publications: usize,
    pub publications_by_year: BTreeMap<i32, usize>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub corpus: Corpus,
    pub cohort: CohortSpec,
    pub truth: GroundTruth,
}

pub fn author_id(i: usize) -> AuthorId {
    AuthorId::new(format!("S{i:05}"))
}

/// Generates a corpus, its cohort and the ground-truth manifest. Output is a
/// pure function of the config (including its seed).
pub fn generate(config: &SynthConfig) -> Result<SynthOutput, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_authors;
    let p = config.base_collab_prob;
    let q = (p * config.cohort_boost).min(1.0);

    let mut in_cohort = vec![false; n];
    let mut planted: Vec<usize> = sample(&mut rng, n, config.n_cohort).into_vec();
    planted.sort_unstable();
    planted.iter().for_each(|&i| in_cohort[i] = true);

    let starts: Vec<i32> = (0..n)
        .map(|_| config.years.from + rng.random_range(0..=config.stagger_years) as i32)
        .collect();
    let fields: Vec<usize> = (0..n).map(|_| rng.random_range(0..config.fields.len())).collect();
    let countries: Vec<usize> = (0..n).map(|_| rng.random_range(0..COUNTRIES.len())).collect();

    let lead_pubs = Poisson::new(config.pubs_per_author_year).map_err(|e| SynthError::Config(e.to_string()))?;
    let citation_dists: Vec<LogNormal<f64>> = config
        .fields
        .iter()
        .map(|f| LogNormal::new(f.mu, f.sigma).map_err(|e| SynthError::Config(e.to_string())))
        .collect::<Result<_, _>>()?;
    let counters = [PATENT_RATE, POLICY_RATE, BLOG_RATE, NEWS_RATE, TWEET_RATE]
        .map(|r| Poisson::new(r).expect("positive constant rate"));

    let ids: Vec<AuthorId> = (0..n).map(author_id).collect();
    let mut records = Vec::new();
    let mut by_year = BTreeMap::new();
    let mut serial = 0usize;

    for year in config.years.years() {
        let active: Vec<usize> = (0..n).filter(|&i| starts[i] <= year).collect();
        let active_cohort: Vec<usize> = active.iter().copied().filter(|&i| in_cohort[i]).collect();
        let active_other: Vec<usize> = active.iter().copied().filter(|&i| !in_cohort[i]).collect();
        let boosted = year >= config.program_start_year;
        let mut year_count = 0usize;

        for &lead in &active {
            let k = lead_pubs.sample(&mut rng) as u64;
            for _ in 0..k {
                let mut coauthors: Vec<usize> = Vec::new();
                if boosted && in_cohort[lead] {
                    for &c in &active_cohort {
                        if c != lead && rng.random_bool(q) {
                            coauthors.push(c);
                        }
                    }
                    draw_subset(&mut rng, &active_other, None, p, &mut coauthors);
                } else {
                    draw_subset(&mut rng, &active, Some(lead), p, &mut coauthors);
                }
                coauthors.sort_unstable();

                let mut authors = Vec::with_capacity(coauthors.len() + 1);
                authors.push(ids[lead].clone());
                authors.extend(coauthors.iter().map(|&c| ids[c].clone()));

                let field = fields[lead];
                let citations = citation_dists[field].sample(&mut rng).floor() as u64;
                let doctype = match rng.random::<f64>() {
                    u if u < 0.85 => DocType::Article,
                    u if u < 0.90 => DocType::Review,
                    _ => DocType::Conference,
                };
                let mut record_countries = BTreeSet::from([COUNTRIES[countries[lead]].to_owned()]);
                if rng.random_bool(config.intl_prob) {
                    let other = (countries[lead] + rng.random_range(1..COUNTRIES.len())) % COUNTRIES.len();
                    record_countries.insert(COUNTRIES[other].to_owned());
                }
                let mut sectors = BTreeSet::from([Sector::Academic]);
                if rng.random_bool(config.corp_prob) {
                    sectors.insert(Sector::Corporate);
                }
                let [patents, policy, blogs, news, tweets] = counters.map(|d| d.sample(&mut rng) as u64);

                records.push(PublicationRecord {
                    eid: Eid::new(format!("SYN-{year}-{serial:07}")),
                    year,
                    authors,
                    citations,
                    field: config.fields[field].name.clone(),
                    doctype,
                    countries: record_countries,
                    sectors,
                    patent_citations: patents,
                    policy_citations: policy,
                    blog_mentions: blogs,
                    news_mentions: news,
                    tweet_mentions: tweets,
                });
                serial += 1;
                year_count += 1;
            }
        }
        by_year.insert(year, year_count);
    }

    let publications = records.len();
    let corpus = Corpus::from_records(records).expect("generated eids are unique");
    let planted_cohort: Vec<AuthorId> = planted.iter().map(|&i| ids[i].clone()).collect();
    let (members, cohort_absent): (Vec<AuthorId>, Vec<AuthorId>) =
        planted_cohort.iter().cloned().partition(|a| corpus.contains_author(a));
    let cohort = CohortSpec {
        name: "cohort".to_owned(),
        members: members.into_iter().collect(),
        program_start_year: config.program_start_year,
    };
    let truth = GroundTruth {
        config: config.clone(),
        cohort_boost: config.cohort_boost,
        program_start_year: config.program_start_year,
        planted_cohort,
        cohort_absent,
        career_start: ids.iter().cloned().zip(starts.iter().copied()).collect(),
        home_field: ids.iter().cloned().zip(fields.iter().map(|&f| config.fields[f].name.clone())).collect(),
        home_country: ids.iter().cloned().zip(countries.iter().map(|&c| COUNTRIES[c].to_owned())).collect(),
        publications,
        publications_by_year: by_year,
    };
    Ok(SynthOutput { corpus, cohort, truth })
}

/// Adds each element of `pool` (except `skip`) to `out` independently with
/// probability `p`, drawn as a binomial count plus a uniform subset.
fn draw_subset(rng: &mut ChaCha8Rng, pool: &[usize], skip: Option<usize>, p: f64, out: &mut Vec<usize>) {
    let skip_pos = skip.and_then(|s| pool.binary_search(&s).ok());
    let len = pool.len() - usize::from(skip_pos.is_some());
    if len == 0 || p == 0.0 {
        return;
    }
    let m = Binomial::new(len as u64, p).expect("valid probability").sample(rng) as usize;
    for j in sample(rng, len, m) {
        let idx = match skip_pos {
            Some(s) if j >= s => j + 1,
            _ => j,
        };
        out.push(pool[idx]);
    }
}

/// Closed-form expectations of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedStats {
    /// Expected number of publications.
    pub publications: f64,
    /// Standard deviation of the publication count.
    pub publications_sd: f64,
    /// Probability that two cohort members share at least one publication by
    /// the final year. Only defined without career staggering.
    pub cohort_pair_edge_prob: Option<f64>,
    /// Same for two non-cohort authors.
    pub background_pair_edge_prob: Option<f64>,
}

impl ExpectedStats {
    /// Expected density of the final-year cohort network.
    pub fn cohort_density(&self) -> Option<f64> {
        self.cohort_pair_edge_prob
    }

    pub fn background_density(&self) -> Option<f64> {
        self.background_pair_edge_prob
    }
}

/// Expectations implied by a config.
///
/// Publications: author careers last `Y - U` years with `U` uniform on
/// `0..=stagger`, so the count is a Poisson mixture with mean
/// `n * rate * (Y - s/2)`.
///
/// Pair edges: the number of publications shared by two authors is a sum of
/// independent Poisson thinnings (lead-and-join plus third-party-led), so
/// `P(edge) = 1 - exp(-Λ)` with Λ summed over years.
pub fn expected_stats(config: &SynthConfig) -> Result<ExpectedStats, SynthError> {
    config.validate()?;
    let n = config.n_authors as f64;
    let rate = config.pubs_per_author_year;
    let span = config.years.len() as f64;
    let s = config.stagger_years as f64;
    let mean_active = span - s / 2.0;
    let var_active = ((s + 1.0).powi(2) - 1.0) / 12.0;
    let publications = n * rate * mean_active;
    let publications_sd = (publications + n * rate * rate * var_active).sqrt();

    let (cohort_pair_edge_prob, background_pair_edge_prob) = if config.stagger_years == 0 {
        let p = config.base_collab_prob;
        let q = (p * config.cohort_boost).min(1.0);
        let k = config.n_cohort as f64;
        let pre = config.years.years().filter(|&y| y < config.program_start_year).count() as f64;
        let post = span - pre;
        let unboosted = rate * (2.0 * p + (n - 2.0) * p * p);
        let boosted_cohort = rate * (2.0 * q + (k - 2.0) * q * q + (n - k) * p * p);
        let lambda_cc = pre * unboosted + post * boosted_cohort;
        let lambda_nn = span * unboosted;
        (Some(1.0 - (-lambda_cc).exp()), Some(1.0 - (-lambda_nn).exp()))
    } else {
        (None, None)
    };
    Ok(ExpectedStats { publications, publications_sd, cohort_pair_edge_prob, background_pair_edge_prob })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig { n_authors: 60, n_cohort: 8, years: crate::ids::YearRange::new(2000, 2009), program_start_year: 2004, stagger_years: 3, ..SynthConfig::default() }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.corpus.to_jsonl(), b.corpus.to_jsonl());
        assert_eq!(a.truth, b.truth);
        let c = generate(&SynthConfig { seed: 2, ..small() }).unwrap();
        assert_ne!(a.corpus.to_jsonl(), c.corpus.to_jsonl());
    }

    #[test]
    fn careers_are_staggered() {
        let out = generate(&small()).unwrap();
        let starts: BTreeSet<i32> = out.truth.career_start.values().copied().collect();
        assert!(starts.len() > 1);
        assert!(out.corpus.records().iter().all(|r| {
            r.authors.iter().all(|a| out.truth.career_start[a] <= r.year)
        }));
    }

    #[test]
    fn boost_one_is_symmetric() {
        let cfg = SynthConfig { cohort_boost: 1.0, stagger_years: 0, ..small() };
        let e = expected_stats(&cfg).unwrap();
        let (c, b) = (e.cohort_density().unwrap(), e.background_density().unwrap());
        assert!((c - b).abs() < 1e-15);
        let boosted = expected_stats(&SynthConfig { cohort_boost: 3.0, ..cfg }).unwrap();
        assert!(boosted.cohort_density().unwrap() > c);
    }

    #[test]
    fn expected_publications_without_stagger() {
        let cfg = SynthConfig { stagger_years: 0, ..small() };
        let e = expected_stats(&cfg).unwrap();
        assert!((e.publications - 60.0 * 10.0 * cfg.pubs_per_author_year).abs() < 1e-9);
        assert!(e.cohort_pair_edge_prob.is_some());
        assert!(expected_stats(&small()).unwrap().cohort_pair_edge_prob.is_none());
    }

    #[test]
    fn subset_draw_skips_lead() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pool: Vec<usize> = (0..10).collect();
        for _ in 0..200 {
            let mut out = vec![];
            draw_subset(&mut rng, &pool, Some(4), 0.5, &mut out);
            assert!(!out.contains(&4));
            let set: BTreeSet<_> = out.iter().collect();
            assert_eq!(set.len(), out.len());
        }
        let mut all = vec![];
        draw_subset(&mut rng, &pool, Some(0), 1.0, &mut all);
        all.sort_unstable();
        assert_eq!(all, (1..10).collect::<Vec<_>>());
    }
}
