//! Per-author career covariates, the co-author candidate pool, and covariate
//! distribution export.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CohortSpec, Corpus, PublicationRecord};
use crate::ids::AuthorId;
use crate::par;
use crate::stats::{Binning, Histogram};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("cohort has no external co-authors")]
    EmptyPool,
    #[error("{} author(s) not found in corpus: {}", .0.len(), join_ids(.0))]
    UnknownAuthors(Vec<AuthorId>),
    #[error("unknown covariate `{0}` (expected first_pub_year, scholarly_output, coauthor_count or citation_total)")]
    UnknownCovariate(String),
    #[error("no groups to export")]
    NoGroups,
    #[error("no profile for author {0}")]
    MissingProfile(AuthorId),
}

fn join_ids(ids: &[AuthorId]) -> String {
    let shown: Vec<&str> = ids.iter().take(10).map(AuthorId::as_str).collect();
    let more = if ids.len() > 10 { ", ..." } else { "" };
    format!("{}{more}", shown.join(", "))
}

/// Career covariates of one author, computed over the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub author: AuthorId,
    pub first_pub_year: i32,
    pub scholarly_output: u64,
    pub coauthor_count: u64,
    pub citation_total: u64,
}

impl AuthorProfile {
    pub fn covariate(&self, c: Covariate) -> f64 {
        match c {
            Covariate::FirstPubYear => self.first_pub_year as f64,
            Covariate::ScholarlyOutput => self.scholarly_output as f64,
            Covariate::CoauthorCount => self.coauthor_count as f64,
            Covariate::CitationTotal => self.citation_total as f64,
        }
    }
}

/// Mergeable partial profile over a subset of an author's records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileParts {
    pub first_pub_year: i32,
    pub scholarly_output: u64,
    pub coauthors: HashSet<AuthorId>,
    pub citation_total: u64,
}

impl ProfileParts {
    /// Accumulates `author`'s covariates over `records`; `None` when the author
    /// is on none of them.
    pub fn collect<'a, I>(author: &AuthorId, records: I) -> Option<ProfileParts>
    where
        I: IntoIterator<Item = &'a PublicationRecord>,
    {
        let mut parts: Option<ProfileParts> = None;
        for r in records {
            if !r.has_author(author) {
                continue;
            }
            let p = parts.get_or_insert_with(|| ProfileParts {
                first_pub_year: r.year,
                scholarly_output: 0,
                coauthors: HashSet::new(),
                citation_total: 0,
            });
            p.first_pub_year = p.first_pub_year.min(r.year);
            p.scholarly_output += 1;
            p.citation_total += r.citations;
            p.coauthors.extend(r.authors.iter().filter(|a| *a != author).cloned());
        }
        parts
    }

    /// Combines partials from disjoint record subsets: (min, sum, union, sum).
    pub fn merge(mut self, other: ProfileParts) -> ProfileParts {
        self.first_pub_year = self.first_pub_year.min(other.first_pub_year);
        self.scholarly_output += other.scholarly_output;
        self.citation_total += other.citation_total;
        self.coauthors.extend(other.coauthors);
        self
    }

    pub fn finish(self, author: AuthorId) -> AuthorProfile {
        AuthorProfile {
            author,
            first_pub_year: self.first_pub_year,
            scholarly_output: self.scholarly_output,
            coauthor_count: self.coauthors.len() as u64,
            citation_total: self.citation_total,
        }
    }
}

/// Profiles for a set of authors plus the requested ids absent from the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProfileSet {
    pub profiles: BTreeMap<AuthorId, AuthorProfile>,
    pub missing: Vec<AuthorId>,
}

impl ProfileSet {
    pub fn get(&self, a: &AuthorId) -> Option<&AuthorProfile> {
        self.profiles.get(a)
    }
}

/// Derives career covariates for every requested author. Authors without any
/// record are reported in `missing` rather than dropped silently.
pub fn derive_profiles(corpus: &Corpus, authors: &BTreeSet<AuthorId>) -> ProfileSet {
    let wanted: Vec<&AuthorId> = authors.iter().collect();
    let derived = par::map(&wanted, |a| {
        let positions = corpus.author_records(a);
        if positions.is_empty() {
            return Err((*a).clone());
        }
        let records = positions.iter().map(|&i| &corpus.records()[i]);
        Ok(profile_from(a, records))
    });
    let mut out = ProfileSet::default();
    for d in derived {
        match d {
            Ok(p) => {
                out.profiles.insert(p.author.clone(), p);
            }
            Err(a) => out.missing.push(a),
        }
    }
    out
}

fn profile_from<'a>(author: &AuthorId, records: impl Iterator<Item = &'a PublicationRecord>) -> AuthorProfile {
    let mut first = i32::MAX;
    let mut output = 0u64;
    let mut citations = 0u64;
    let mut coauthors: HashSet<&AuthorId> = HashSet::new();
    for r in records {
        first = first.min(r.year);
        output += 1;
        citations += r.citations;
        coauthors.extend(r.authors.iter().filter(|a| *a != author));
    }
    AuthorProfile {
        author: author.clone(),
        first_pub_year: first,
        scholarly_output: output,
        coauthor_count: coauthors.len() as u64,
        citation_total: citations,
    }
}

/// Everyone who co-authored with the cohort, minus the cohort itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePool {
    pub candidates: BTreeSet<AuthorId>,
    /// Number of cohort-authored records each candidate appears on.
    pub provenance: BTreeMap<AuthorId, u64>,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn to_delimited(&self) -> String {
        let mut out = String::from("author,shared_publications\n");
        for (a, n) in &self.provenance {
            out.push_str(&format!("{a},{n}\n"));
        }
        out
    }
}

pub fn coauthor_pool(corpus: &Corpus, cohort: &CohortSpec) -> Result<CandidatePool, ProfileError> {
    let missing: Vec<AuthorId> =
        cohort.members.iter().filter(|m| !corpus.contains_author(m)).cloned().collect();
    if !missing.is_empty() {
        return Err(ProfileError::UnknownAuthors(missing));
    }
    let positions: BTreeSet<usize> = cohort
        .members
        .iter()
        .flat_map(|m| corpus.author_records(m).iter().copied())
        .collect();
    let mut provenance: BTreeMap<AuthorId, u64> = BTreeMap::new();
    for &i in &positions {
        for a in &corpus.records()[i].authors {
            if !cohort.members.contains(a) {
                *provenance.entry(a.clone()).or_default() += 1;
            }
        }
    }
    if provenance.is_empty() {
        return Err(ProfileError::EmptyPool);
    }
    Ok(CandidatePool { candidates: provenance.keys().cloned().collect(), provenance })
}

/// A career covariate that can be exported or matched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    FirstPubYear,
    ScholarlyOutput,
    CoauthorCount,
    CitationTotal,
}

impl Covariate {
    pub const ALL: [Covariate; 4] = [
        Covariate::FirstPubYear,
        Covariate::ScholarlyOutput,
        Covariate::CoauthorCount,
        Covariate::CitationTotal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Covariate::FirstPubYear => "first_pub_year",
            Covariate::ScholarlyOutput => "scholarly_output",
            Covariate::CoauthorCount => "coauthor_count",
            Covariate::CitationTotal => "citation_total",
        }
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Covariate {
    type Err = ProfileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Covariate::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ProfileError::UnknownCovariate(s.to_owned()))
    }
}

/// Histogram of one covariate for several labelled author groups, on shared
/// bin edges.
pub fn distribution_export(
    profiles: &ProfileSet,
    covariate: Covariate,
    groups: &[(String, BTreeSet<AuthorId>)],
    binning: Binning,
) -> Result<Histogram, ProfileError> {
    if groups.is_empty() {
        return Err(ProfileError::NoGroups);
    }
    let mut series = Vec::with_capacity(groups.len());
    for (label, members) in groups {
        let mut values = Vec::with_capacity(members.len());
        for m in members {
            let p = profiles.get(m).ok_or_else(|| ProfileError::MissingProfile(m.clone()))?;
            values.push(p.covariate(covariate));
        }
        series.push((label.clone(), values));
    }
    Ok(Histogram::build(&series, binning))
}

/// Delimited profile table: `author,group,first_pub_year,scholarly_output,coauthor_count,citation_total`.
pub fn profiles_to_delimited(profiles: &ProfileSet, group_of: impl Fn(&AuthorId) -> &'static str) -> String {
    let mut out = String::from("author,group,first_pub_year,scholarly_output,coauthor_count,citation_total\n");
    for p in profiles.profiles.values() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.author,
            group_of(&p.author),
            p.first_pub_year,
            p.scholarly_output,
            p.coauthor_count,
            p.citation_total
        ));
    }
    out
}
