//! Bibliometric indicator panels over deduplicated group publication sets
//! and per author, with citation baselines, time series and distributions.

mod baseline;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baseline::{fwci, BaselineLevel, BaselineTable, CellKey, CellStats, Resolved, MIN_CELL_SIZE};
pub use report::{format_count, PanelComparison, SECTIONS};

use crate::corpus::Corpus;
use crate::ids::{AuthorId, Eid, YearRange};
use crate::par;
use crate::stats::{Binning, Histogram};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no baseline covers {eid} (year {year})")]
    Unresolvable { eid: Eid, year: i32 },
    #[error("publication {0} is not in the corpus")]
    UnknownPublication(Eid),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("metric `{0}` has no time series (use citation_count, citations_per_publication or fwci)")]
    NotASeries(String),
    #[error("author {0} has no publications")]
    UnknownAuthor(AuthorId),
    #[error("malformed panel table: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Group,
    Author,
}

/// A deduplicated set of publications attributed to an owner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicationSet {
    pub owner: String,
    pub level: Level,
    pub eids: BTreeSet<Eid>,
}

impl PublicationSet {
    pub fn len(&self) -> usize {
        self.eids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eids.is_empty()
    }
}

/// Union of the members' records inside `window`; a publication shared by
/// several members is counted once.
pub fn group_publication_set(corpus: &Corpus, owner: &str, members: &BTreeSet<AuthorId>, window: Option<YearRange>) -> PublicationSet {
    let mut eids = BTreeSet::new();
    for m in members {
        for &p in corpus.author_records(m) {
            let r = &corpus.records()[p];
            if window.is_none_or(|w| w.contains(r.year)) {
                eids.insert(r.eid.clone());
            }
        }
    }
    if eids.is_empty() {
        log::warn!("publication set for `{owner}` is empty");
    }
    PublicationSet { owner: owner.to_owned(), level: Level::Group, eids }
}

/// Shared publications between two sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub shared: usize,
    pub union: usize,
}

impl Overlap {
    pub fn of(a: &PublicationSet, b: &PublicationSet) -> Overlap {
        let shared = a.eids.intersection(&b.eids).count();
        Overlap { shared, union: a.len() + b.len() - shared }
    }

    /// Shared share of the union, in percent.
    pub fn percent(&self) -> f64 {
        if self.union == 0 {
            0.0
        } else {
            100.0 * self.shared as f64 / self.union as f64
        }
    }
}

impl fmt::Display for Overlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of {} publications shared ({:.1}%)", self.shared, self.union, self.percent())
    }
}

/// Record-coverage notes accompanying a panel.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub publications: usize,
    /// Records with at least one known country (denominator of intl %).
    pub countries_known: usize,
    /// Records with at least one known sector (denominator of acad-corp %).
    pub sectors_known: usize,
    /// Records whose baseline came from a pooled fallback.
    pub fallback_baselines: usize,
}

/// The indicator panel for one publication set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsPanel {
    pub citation_count: u64,
    pub citations_per_publication: f64,
    pub cited_publications_pct: f64,
    pub fwci: f64,
    pub top1pct_count: u64,
    pub intl_collab_pct: f64,
    pub intl_collab_impact: f64,
    pub acad_corp_pct: f64,
    pub acad_corp_impact: f64,
    pub citing_patents: u64,
    pub policy_citations: u64,
    pub blog_mentions: u64,
    pub news_mentions: u64,
    pub tweets: u64,
    pub coverage: Coverage,
    pub notes: Vec<String>,
}

/// The fourteen panel indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CitationCount,
    CitationsPerPublication,
    CitedPublicationsPct,
    Fwci,
    Top1pctCount,
    IntlCollabPct,
    IntlCollabImpact,
    AcadCorpPct,
    AcadCorpImpact,
    CitingPatents,
    PolicyCitations,
    BlogMentions,
    NewsMentions,
    Tweets,
}

impl Metric {
    pub const ALL: [Metric; 14] = [
        Metric::CitationCount,
        Metric::CitationsPerPublication,
        Metric::CitedPublicationsPct,
        Metric::Fwci,
        Metric::Top1pctCount,
        Metric::IntlCollabPct,
        Metric::IntlCollabImpact,
        Metric::AcadCorpPct,
        Metric::AcadCorpImpact,
        Metric::CitingPatents,
        Metric::PolicyCitations,
        Metric::BlogMentions,
        Metric::NewsMentions,
        Metric::Tweets,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::CitationCount => "citation_count",
            Metric::CitationsPerPublication => "citations_per_publication",
            Metric::CitedPublicationsPct => "cited_publications_pct",
            Metric::Fwci => "fwci",
            Metric::Top1pctCount => "top1pct_count",
            Metric::IntlCollabPct => "intl_collab_pct",
            Metric::IntlCollabImpact => "intl_collab_impact",
            Metric::AcadCorpPct => "acad_corp_pct",
            Metric::AcadCorpImpact => "acad_corp_impact",
            Metric::CitingPatents => "citing_patents",
            Metric::PolicyCitations => "policy_citations",
            Metric::BlogMentions => "blog_mentions",
            Metric::NewsMentions => "news_mentions",
            Metric::Tweets => "tweets",
        }
    }

    /// Row label in the human-readable report.
    pub fn label(self) -> &'static str {
        match self {
            Metric::CitationCount => "Citation Count",
            Metric::CitationsPerPublication => "Citations per Publication",
            Metric::CitedPublicationsPct => "Cited Publications (%)",
            Metric::Fwci => "Field-Weighted Citation Impact",
            Metric::Top1pctCount => "Output in Top 1% Citation Percentiles",
            Metric::IntlCollabPct => "International Collaboration (%)",
            Metric::IntlCollabImpact => "International Collaboration Impact",
            Metric::AcadCorpPct => "Academic-Corporate Collaboration (%)",
            Metric::AcadCorpImpact => "Academic-Corporate Collaboration Impact",
            Metric::CitingPatents => "Citing-Patents Count",
            Metric::PolicyCitations => "Policy Citations",
            Metric::BlogMentions => "Blog mentions",
            Metric::NewsMentions => "News mentions",
            Metric::Tweets => "Tweets",
        }
    }

    pub fn is_count(self) -> bool {
        matches!(
            self,
            Metric::CitationCount
                | Metric::Top1pctCount
                | Metric::CitingPatents
                | Metric::PolicyCitations
                | Metric::BlogMentions
                | Metric::NewsMentions
                | Metric::Tweets
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = match s {
            "cpp" => "citations_per_publication",
            other => other,
        };
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| MetricsError::UnknownMetric(s.to_owned()))
    }
}

impl MetricsPanel {
    /// Sets one indicator; count metrics are truncated to integers.
    pub fn set(&mut self, m: Metric, v: f64) {
        let c = v as u64;
        match m {
            Metric::CitationCount => self.citation_count = c,
            Metric::CitationsPerPublication => self.citations_per_publication = v,
            Metric::CitedPublicationsPct => self.cited_publications_pct = v,
            Metric::Fwci => self.fwci = v,
            Metric::Top1pctCount => self.top1pct_count = c,
            Metric::IntlCollabPct => self.intl_collab_pct = v,
            Metric::IntlCollabImpact => self.intl_collab_impact = v,
            Metric::AcadCorpPct => self.acad_corp_pct = v,
            Metric::AcadCorpImpact => self.acad_corp_impact = v,
            Metric::CitingPatents => self.citing_patents = c,
            Metric::PolicyCitations => self.policy_citations = c,
            Metric::BlogMentions => self.blog_mentions = c,
            Metric::NewsMentions => self.news_mentions = c,
            Metric::Tweets => self.tweets = c,
        }
    }

    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::CitationCount => self.citation_count as f64,
            Metric::CitationsPerPublication => self.citations_per_publication,
            Metric::CitedPublicationsPct => self.cited_publications_pct,
            Metric::Fwci => self.fwci,
            Metric::Top1pctCount => self.top1pct_count as f64,
            Metric::IntlCollabPct => self.intl_collab_pct,
            Metric::IntlCollabImpact => self.intl_collab_impact,
            Metric::AcadCorpPct => self.acad_corp_pct,
            Metric::AcadCorpImpact => self.acad_corp_impact,
            Metric::CitingPatents => self.citing_patents as f64,
            Metric::PolicyCitations => self.policy_citations as f64,
            Metric::BlogMentions => self.blog_mentions as f64,
            Metric::NewsMentions => self.news_mentions as f64,
            Metric::Tweets => self.tweets as f64,
        }
    }
}

/// Computes the indicator panel of a publication set.
///
/// Collaboration percentages use only records whose countries (resp. sectors)
/// are known as denominators; the coverage block reports those counts.
pub fn panel(set: &PublicationSet, corpus: &Corpus, baselines: &BaselineTable) -> Result<MetricsPanel, MetricsError> {
    let mut p = MetricsPanel::default();
    if set.is_empty() {
        p.notes.push(format!("empty publication set for `{}`", set.owner));
        return Ok(p);
    }
    let n = set.len() as f64;
    let mut cited = 0u64;
    let mut fwci_sum = 0.0;
    let (mut intl_n, mut intl_cites) = (0u64, 0u64);
    let (mut ac_n, mut ac_cites) = (0u64, 0u64);
    for eid in &set.eids {
        let r = corpus.get(eid).ok_or_else(|| MetricsError::UnknownPublication(eid.clone()))?;
        let base = baselines.resolve(r)?;
        p.citation_count += r.citations;
        if r.citations > 0 {
            cited += 1;
        }
        fwci_sum += fwci(r, baselines)?;
        if r.citations >= base.stats.p99 {
            p.top1pct_count += 1;
        }
        if base.level != BaselineLevel::Cell {
            p.coverage.fallback_baselines += 1;
        }
        if !r.countries.is_empty() {
            p.coverage.countries_known += 1;
            if r.is_international() {
                intl_n += 1;
                intl_cites += r.citations;
            }
        }
        if !r.sectors.is_empty() {
            p.coverage.sectors_known += 1;
            if r.is_academic_corporate() {
                ac_n += 1;
                ac_cites += r.citations;
            }
        }
        p.citing_patents += r.patent_citations;
        p.policy_citations += r.policy_citations;
        p.blog_mentions += r.blog_mentions;
        p.news_mentions += r.news_mentions;
        p.tweets += r.tweet_mentions;
    }
    p.coverage.publications = set.len();
    p.citations_per_publication = p.citation_count as f64 / n;
    p.cited_publications_pct = 100.0 * cited as f64 / n;
    p.fwci = fwci_sum / n;
    let ratio = |num: u64, den: usize| if den == 0 { 0.0 } else { 100.0 * num as f64 / den as f64 };
    let avg = |sum: u64, k: u64| if k == 0 { 0.0 } else { sum as f64 / k as f64 };
    p.intl_collab_pct = ratio(intl_n, p.coverage.countries_known);
    p.intl_collab_impact = avg(intl_cites, intl_n);
    p.acad_corp_pct = ratio(ac_n, p.coverage.sectors_known);
    p.acad_corp_impact = avg(ac_cites, ac_n);
    if p.coverage.countries_known < set.len() {
        p.notes.push(format!(
            "international collaboration over {} of {} records with known countries",
            p.coverage.countries_known,
            set.len()
        ));
    }
    if p.coverage.sectors_known < set.len() {
        p.notes.push(format!(
            "academic-corporate collaboration over {} of {} records with known sectors",
            p.coverage.sectors_known,
            set.len()
        ));
    }
    if p.coverage.fallback_baselines > 0 {
        p.notes.push(format!("{} record(s) use pooled fallback baselines", p.coverage.fallback_baselines));
    }
    Ok(p)
}

/// Metrics available as per-year series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMetric {
    CitationCount,
    CitationsPerPublication,
    Fwci,
}

impl TryFrom<Metric> for SeriesMetric {
    type Error = MetricsError;

    fn try_from(m: Metric) -> Result<Self, Self::Error> {
        match m {
            Metric::CitationCount => Ok(SeriesMetric::CitationCount),
            Metric::CitationsPerPublication => Ok(SeriesMetric::CitationsPerPublication),
            Metric::Fwci => Ok(SeriesMetric::Fwci),
            other => Err(MetricsError::NotASeries(other.name().to_owned())),
        }
    }
}

/// Group-level metric for each publication year in `years`; years without
/// publications report 0.
pub fn timeseries(
    members: &BTreeSet<AuthorId>,
    corpus: &Corpus,
    baselines: &BaselineTable,
    metric: SeriesMetric,
    years: &[i32],
) -> Result<Vec<(i32, f64)>, MetricsError> {
    let rows = par::map(years, |&y| -> Result<(i32, f64), MetricsError> {
        let set = group_publication_set(corpus, "series", members, Some(YearRange::new(y, y)));
        if set.is_empty() {
            return Ok((y, 0.0));
        }
        let p = panel(&set, corpus, baselines)?;
        let v = match metric {
            SeriesMetric::CitationCount => p.citation_count as f64,
            SeriesMetric::CitationsPerPublication => p.citations_per_publication,
            SeriesMetric::Fwci => p.fwci,
        };
        Ok((y, v))
    });
    rows.into_iter().collect()
}

/// Panels per author over each author's full publication set; publications
/// shared by several authors count for each of them.
pub fn author_level_panels(
    corpus: &Corpus,
    authors: &BTreeSet<AuthorId>,
    baselines: &BaselineTable,
) -> Result<BTreeMap<AuthorId, MetricsPanel>, MetricsError> {
    let list: Vec<&AuthorId> = authors.iter().collect();
    let panels = par::map(&list, |a| -> Result<(AuthorId, MetricsPanel), MetricsError> {
        let positions = corpus.author_records(a);
        if positions.is_empty() {
            return Err(MetricsError::UnknownAuthor((*a).clone()));
        }
        let set = PublicationSet {
            owner: a.to_string(),
            level: Level::Author,
            eids: positions.iter().map(|&i| corpus.records()[i].eid.clone()).collect(),
        };
        Ok(((*a).clone(), panel(&set, corpus, baselines)?))
    });
    panels.into_iter().collect()
}

/// Distribution of one author-level metric per labelled group.
pub fn author_distribution(
    panels: &BTreeMap<AuthorId, MetricsPanel>,
    metric: Metric,
    groups: &[(String, BTreeSet<AuthorId>)],
    binning: Binning,
) -> Result<Histogram, MetricsError> {
    let mut series = Vec::with_capacity(groups.len());
    for (label, members) in groups {
        let mut values = Vec::with_capacity(members.len());
        for m in members {
            let p = panels.get(m).ok_or_else(|| MetricsError::UnknownAuthor(m.clone()))?;
            values.push(p.get(metric));
        }
        series.push((label.clone(), values));
    }
    Ok(Histogram::build(&series, binning))
}

/// Two-group series as delimited text: `year,<a>,<b>`.
pub fn series_to_delimited(label_a: &str, a: &[(i32, f64)], label_b: &str, b: &[(i32, f64)]) -> String {
    let mut out = format!("year,{label_a},{label_b}\n");
    for ((y, va), (_, vb)) in a.iter().zip(b) {
        out.push_str(&format!("{y},{va},{vb}\n"));
    }
    out
}
