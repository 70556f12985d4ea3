//! Counterfactual cohort construction: covariate standardization, a logistic
//! propensity model, greedy 1:1 nearest-neighbour matching without
//! replacement, and balance diagnostics.

mod balance;
mod propensity;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use balance::{balance_report, smd, variance_ratio, BalanceReport, CovariateBalance, Smd};
pub use propensity::{fit_propensity, FitOptions, PropensityFit, NCOEF};

use crate::ids::AuthorId;
use crate::par;
use crate::profiles::{Covariate, ProfileSet};

/// Number of matching covariates.
pub const NCOV: usize = 3;

/// Matching covariates, in the column order used by every vector here.
pub const COVARIATES: [Covariate; NCOV] =
    [Covariate::FirstPubYear, Covariate::ScholarlyOutput, Covariate::CoauthorCount];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatchError {
    #[error("focal set is empty")]
    EmptyFocal,
    #[error("pool of {pool} cannot supply {focal} focal authors without replacement")]
    PoolTooSmall { focal: usize, pool: usize },
    #[error("propensity fit did not converge after {iterations} iterations (max |gradient| = {gradient_norm:e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },
    #[error("author ids appear in both focal and pool (or twice): {0:?}")]
    DuplicateIds(Vec<AuthorId>),
    #[error("no profile for author {0}")]
    MissingProfile(AuthorId),
    #[error("invalid priority `{0}`: expected a permutation of out,year,coauth")]
    BadPriority(String),
    #[error("unknown strategy `{0}` (expected propensity or lexicographic)")]
    BadStrategy(String),
}

/// One author's matching covariates: raw values and standardized copies.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateVector {
    pub id: AuthorId,
    pub raw: [f64; NCOV],
    pub standardized: [f64; NCOV],
}

/// Per-coordinate mean and population standard deviation over focal ∪ pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub mean: [f64; NCOV],
    pub sd: [f64; NCOV],
}

impl Standardizer {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64; NCOV]>) -> Standardizer {
        let rows: Vec<&[f64; NCOV]> = rows.into_iter().collect();
        let n = rows.len().max(1) as f64;
        let mut mean = [0.0; NCOV];
        for r in &rows {
            for k in 0..NCOV {
                mean[k] += r[k];
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut sd = [0.0; NCOV];
        for r in &rows {
            for k in 0..NCOV {
                sd[k] += (r[k] - mean[k]).powi(2);
            }
        }
        sd.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Standardizer { mean, sd }
    }

    /// Zero-variance coordinates map to 0.
    pub fn apply(&self, raw: &[f64; NCOV]) -> [f64; NCOV] {
        let mut z = [0.0; NCOV];
        for k in 0..NCOV {
            z[k] = if self.sd[k] > 0.0 { (raw[k] - self.mean[k]) / self.sd[k] } else { 0.0 };
        }
        z
    }
}

/// An author ready for matching: covariates plus propensity score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredUnit {
    pub id: AuthorId,
    pub raw: [f64; NCOV],
    pub z: [f64; NCOV],
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Propensity,
    Lexicographic,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Propensity => "propensity",
            Strategy::Lexicographic => "lexicographic",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = MatchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "propensity" => Ok(Strategy::Propensity),
            "lexicographic" => Ok(Strategy::Lexicographic),
            other => Err(MatchError::BadStrategy(other.to_owned())),
        }
    }
}

/// Covariate priority order for the lexicographic strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Priority(pub [Covariate; NCOV]);

impl Default for Priority {
    /// Publication count, then year of first publication, then co-authors.
    fn default() -> Self {
        Priority([Covariate::ScholarlyOutput, Covariate::FirstPubYear, Covariate::CoauthorCount])
    }
}

impl FromStr for Priority {
    type Err = MatchError;

    /// Comma-separated permutation of `out`, `year`, `coauth`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MatchError::BadPriority(s.to_owned());
        let parsed: Vec<Covariate> = s
            .split(',')
            .map(|t| match t.trim() {
                "out" | "scholarly_output" => Ok(Covariate::ScholarlyOutput),
                "year" | "first_pub_year" => Ok(Covariate::FirstPubYear),
                "coauth" | "coauthor_count" => Ok(Covariate::CoauthorCount),
                _ => Err(bad()),
            })
            .collect::<Result<_, _>>()?;
        let distinct: BTreeSet<Covariate> = parsed.iter().copied().collect();
        if parsed.len() != NCOV || distinct.len() != NCOV {
            return Err(bad());
        }
        Ok(Priority([parsed[0], parsed[1], parsed[2]]))
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let short: Vec<&str> = self
            .0
            .iter()
            .map(|c| match c {
                Covariate::ScholarlyOutput => "out",
                Covariate::FirstPubYear => "year",
                _ => "coauth",
            })
            .collect();
        f.write_str(&short.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOptions {
    pub strategy: Strategy,
    pub priority: Priority,
    /// Weight ladder applied to the priority order (lexicographic strategy).
    pub weights: [f64; NCOV],
    /// Maximum admissible score difference; `None` disables the caliper.
    pub caliper: Option<f64>,
    pub fit: FitOptions,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            strategy: Strategy::Propensity,
            priority: Priority::default(),
            weights: [100.0, 10.0, 1.0],
            caliper: None,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub focal: AuthorId,
    pub control: AuthorId,
    pub distance: f64,
    pub focal_score: f64,
    pub control_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchPair>,
    pub strategy: Strategy,
    /// Focal authors left without a control (only possible with a caliper).
    pub unmatched: Vec<AuthorId>,
    pub diagnostics: BalanceReport,
}

impl MatchResult {
    pub fn controls(&self) -> BTreeSet<AuthorId> {
        self.pairs.iter().map(|p| p.control.clone()).collect()
    }

    pub fn total_distance(&self) -> f64 {
        self.pairs.iter().map(|p| p.distance).sum()
    }

    /// `focal_id,control_id,distance,focal_score,control_score` rows, then the
    /// strategy and balance block as `#` comment lines.
    pub fn to_delimited(&self) -> String {
        let mut out = String::from("focal_id,control_id,distance,focal_score,control_score\n");
        for p in &self.pairs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.focal, p.control, p.distance, p.focal_score, p.control_score
            ));
        }
        out.push_str(&format!("# strategy={}\n", self.strategy));
        for u in &self.unmatched {
            out.push_str(&format!("# unmatched {u}\n"));
        }
        out.push_str(&self.diagnostics.to_block());
        out
    }
}

/// Total order used to compare candidate keys; `f64` compared by `total_cmp`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64, f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.total_cmp(&other.1)).then(self.2.cmp(&other.2))
    }
}

fn euclidean(a: &[f64; NCOV], b: &[f64; NCOV]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Weighted L2 distance where `weights[i]` applies to covariate `priority[i]`.
pub fn weighted_distance(a: &[f64; NCOV], b: &[f64; NCOV], priority: &Priority, weights: &[f64; NCOV]) -> f64 {
    priority
        .0
        .iter()
        .zip(weights)
        .map(|(c, w)| {
            let k = COVARIATES.iter().position(|x| x == c).expect("matching covariate");
            w * (a[k] - b[k]).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Greedy 1:1 nearest-neighbour matching without replacement.
///
/// Propensity strategy: focal authors are taken in descending score order
/// (ascending id on ties); each takes the unmatched pool author with the
/// smallest score difference, breaking ties by standardized covariate
/// distance and then by the smaller id. The reported distance is the score
/// difference.
///
/// Lexicographic strategy: focal authors are taken in ascending id order and
/// distance is the priority-weighted L2 distance on standardized covariates,
/// ties broken by the smaller id.
pub fn nn_match(focal: &[ScoredUnit], pool: &[ScoredUnit], opts: &MatchOptions) -> Result<MatchResult, MatchError> {
    if focal.is_empty() {
        return Err(MatchError::EmptyFocal);
    }
    check_disjoint(focal, pool)?;
    if pool.len() < focal.len() {
        return Err(MatchError::PoolTooSmall { focal: focal.len(), pool: pool.len() });
    }

    let mut pool_sorted: Vec<&ScoredUnit> = pool.iter().collect();
    pool_sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut order: Vec<&ScoredUnit> = focal.iter().collect();
    match opts.strategy {
        Strategy::Propensity => order.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id))),
        Strategy::Lexicographic => order.sort_by(|a, b| a.id.cmp(&b.id)),
    }

    let mut used = vec![false; pool_sorted.len()];
    let mut pairs = Vec::with_capacity(focal.len());
    let mut unmatched = Vec::new();
    for f in order {
        let best = par::min_by_key(&pool_sorted, |i, c| {
            if used[i] {
                return None;
            }
            let ds = (f.score - c.score).abs();
            if opts.caliper.is_some_and(|cal| ds > cal) {
                return None;
            }
            Some(match opts.strategy {
                Strategy::Propensity => Key(ds, euclidean(&f.z, &c.z), i),
                Strategy::Lexicographic => Key(weighted_distance(&f.z, &c.z, &opts.priority, &opts.weights), 0.0, i),
            })
        });
        match best {
            Some((i, key)) => {
                used[i] = true;
                let c = pool_sorted[i];
                pairs.push(MatchPair {
                    focal: f.id.clone(),
                    control: c.id.clone(),
                    distance: key.0,
                    focal_score: f.score,
                    control_score: c.score,
                });
            }
            None => unmatched.push(f.id.clone()),
        }
    }

    let focal_raw: Vec<[f64; NCOV]> = focal.iter().map(|u| u.raw).collect();
    let pool_raw: Vec<[f64; NCOV]> = pool.iter().map(|u| u.raw).collect();
    let by_id: std::collections::HashMap<&AuthorId, &ScoredUnit> = pool.iter().map(|u| (&u.id, u)).collect();
    let control_raw: Vec<[f64; NCOV]> = pairs.iter().map(|p| by_id[&p.control].raw).collect();
    let diagnostics = balance_report(&focal_raw, &pool_raw, &control_raw);
    Ok(MatchResult { pairs, strategy: opts.strategy, unmatched, diagnostics })
}

fn check_disjoint(focal: &[ScoredUnit], pool: &[ScoredUnit]) -> Result<(), MatchError> {
    let mut seen = HashSet::with_capacity(focal.len() + pool.len());
    let mut dupes: BTreeSet<AuthorId> = BTreeSet::new();
    for u in focal.iter().chain(pool) {
        if !seen.insert(&u.id) {
            dupes.insert(u.id.clone());
        }
    }
    if dupes.is_empty() {
        Ok(())
    } else {
        Err(MatchError::DuplicateIds(dupes.into_iter().collect()))
    }
}

/// Standardizes raw covariates over focal ∪ pool, fits the propensity model
/// and scores every unit.
pub fn score_units(
    focal: &[(AuthorId, [f64; NCOV])],
    pool: &[(AuthorId, [f64; NCOV])],
    fit: &FitOptions,
) -> Result<(Vec<ScoredUnit>, Vec<ScoredUnit>, PropensityFit), MatchError> {
    let std = Standardizer::fit(focal.iter().chain(pool).map(|(_, r)| r));
    let fz: Vec<[f64; NCOV]> = focal.iter().map(|(_, r)| std.apply(r)).collect();
    let pz: Vec<[f64; NCOV]> = pool.iter().map(|(_, r)| std.apply(r)).collect();
    let model = fit_propensity(&fz, &pz, fit)?;
    let scored = |units: &[(AuthorId, [f64; NCOV])], zs: &[[f64; NCOV]]| -> Vec<ScoredUnit> {
        units
            .iter()
            .zip(zs)
            .map(|((id, raw), z)| ScoredUnit { id: id.clone(), raw: *raw, z: *z, score: model.score(z) })
            .collect()
    };
    let f = scored(focal, &fz);
    let p = scored(pool, &pz);
    Ok((f, p, model))
}

/// Raw matching covariates of one profiled author.
pub fn raw_covariates(profiles: &ProfileSet, id: &AuthorId) -> Result<[f64; NCOV], MatchError> {
    let p = profiles.get(id).ok_or_else(|| MatchError::MissingProfile(id.clone()))?;
    Ok(COVARIATES.map(|c| p.covariate(c)))
}

/// Full matching step from profiles: standardize, fit, score, match.
pub fn build_counterfactual(
    profiles: &ProfileSet,
    focal: &BTreeSet<AuthorId>,
    pool: &BTreeSet<AuthorId>,
    opts: &MatchOptions,
) -> Result<(MatchResult, PropensityFit), MatchError> {
    let collect = |ids: &BTreeSet<AuthorId>| -> Result<Vec<(AuthorId, [f64; NCOV])>, MatchError> {
        ids.iter().map(|id| Ok((id.clone(), raw_covariates(profiles, id)?))).collect()
    };
    let f = collect(focal)?;
    let p = collect(pool)?;
    let (fs, ps, model) = score_units(&f, &p, &opts.fit)?;
    let result = nn_match(&fs, &ps, opts)?;
    Ok((result, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(id: &str, score: f64, z: [f64; 3]) -> ScoredUnit {
        ScoredUnit { id: id.into(), raw: z, z, score }
    }

    #[test]
    fn exact_duplicate_matches_at_zero_distance() {
        let focal = [unit("F", 0.4, [1.0, 2.0, 3.0])];
        let pool = [unit("P1", 0.1, [0.0; 3]), unit("P2", 0.4, [1.0, 2.0, 3.0]), unit("P3", 0.9, [5.0; 3])];
        for strategy in [Strategy::Propensity, Strategy::Lexicographic] {
            let r = nn_match(&focal, &pool, &MatchOptions { strategy, ..Default::default() }).unwrap();
            assert_eq!(r.pairs[0].control, AuthorId::from("P2"));
            assert_eq!(r.pairs[0].distance, 0.0);
        }
    }

    #[test]
    fn higher_scores_choose_first() {
        let focal = [unit("F1", 0.5, [0.0; 3]), unit("F2", 0.6, [0.0; 3])];
        let pool = [unit("P1", 0.55, [0.0; 3]), unit("P2", 0.9, [0.0; 3])];
        let r = nn_match(&focal, &pool, &MatchOptions::default()).unwrap();
        assert_eq!(r.pairs[0].focal, AuthorId::from("F2"));
        assert_eq!(r.pairs[0].control, AuthorId::from("P1"));
        assert_eq!(r.pairs[1].control, AuthorId::from("P2"));
    }

    #[test]
    fn score_ties_break_on_covariates_then_id() {
        let focal = [unit("F", 0.5, [0.0; 3])];
        let pool = [unit("B", 0.6, [1.0, 0.0, 0.0]), unit("A", 0.4, [1.0, 0.0, 0.0]), unit("C", 0.4, [3.0, 0.0, 0.0])];
        let r = nn_match(&focal, &pool, &MatchOptions::default()).unwrap();
        assert_eq!(r.pairs[0].control, AuthorId::from("A"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let focal = [unit("X", 0.5, [0.0; 3])];
        let pool = [unit("X", 0.5, [0.0; 3]), unit("Y", 0.5, [0.0; 3])];
        assert_eq!(
            nn_match(&focal, &pool, &MatchOptions::default()).unwrap_err(),
            MatchError::DuplicateIds(vec!["X".into()])
        );
    }

    #[test]
    fn caliper_can_orphan_focal() {
        let focal = [unit("F", 0.9, [0.0; 3])];
        let pool = [unit("P", 0.1, [0.0; 3])];
        let opts = MatchOptions { caliper: Some(0.2), ..Default::default() };
        let r = nn_match(&focal, &pool, &opts).unwrap();
        assert!(r.pairs.is_empty());
        assert_eq!(r.unmatched, vec![AuthorId::from("F")]);
    }

    #[test]
    fn priority_parsing() {
        assert_eq!("out,year,coauth".parse::<Priority>().unwrap(), Priority::default());
        assert_eq!(Priority::default().to_string(), "out,year,coauth");
        assert!("out,out,year".parse::<Priority>().is_err());
        assert!("out,year".parse::<Priority>().is_err());
    }

    #[test]
    fn weight_ladder_follows_priority() {
        let p = Priority([Covariate::FirstPubYear, Covariate::ScholarlyOutput, Covariate::CoauthorCount]);
        // covariate columns are (year, output, coauth)
        let d = weighted_distance(&[1.0, 0.0, 0.0], &[0.0; 3], &p, &[100.0, 10.0, 1.0]);
        assert_eq!(d, 10.0);
        let d = weighted_distance(&[0.0, 1.0, 0.0], &[0.0; 3], &Priority::default(), &[100.0, 10.0, 1.0]);
        assert_eq!(d, 10.0);
    }

    #[test]
    fn standardizer_zero_variance_maps_to_zero() {
        let rows = [[1.0, 5.0, 2.0], [3.0, 5.0, 4.0]];
        let s = Standardizer::fit(rows.iter());
        assert_eq!(s.apply(&rows[0]), [-1.0, 0.0, -1.0]);
    }
}
