use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::ids::YearRange;

/// Citation distribution of one subject field: `floor(exp(N(mu, sigma)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub mu: f64,
    pub sigma: f64,
}

/// Parameters of a synthetic corpus with a planted convening intervention.
///
/// Text form is one `key = value` per line; `#` starts a comment. Fields are
/// written `fields = NAME:mu:sigma, NAME:mu:sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_authors: usize,
    pub n_cohort: usize,
    pub years: YearRange,
    pub program_start_year: i32,
    /// Probability that a given active author joins a given publication.
    pub base_collab_prob: f64,
    /// Multiplier on the join probability between cohort members from the
    /// program start year on.
    pub cohort_boost: f64,
    /// Poisson rate of led publications per active author and year.
    pub pubs_per_author_year: f64,
    /// Career starts are offset uniformly by 0..=stagger_years from the
    /// first simulated year.
    pub stagger_years: u32,
    pub fields: Vec<FieldSpec>,
    pub intl_prob: f64,
    pub corp_prob: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_authors: 400,
            n_cohort: 30,
            years: YearRange::new(1981, 2020),
            program_start_year: 1996,
            base_collab_prob: 0.006,
            cohort_boost: 3.0,
            pubs_per_author_year: 0.8,
            stagger_years: 15,
            fields: vec![
                FieldSpec { name: "PHYS".into(), mu: 2.3, sigma: 1.1 },
                FieldSpec { name: "ASTR".into(), mu: 2.6, sigma: 1.2 },
                FieldSpec { name: "MATH".into(), mu: 1.4, sigma: 0.9 },
            ],
            intl_prob: 0.5,
            corp_prob: 0.05,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        for (name, p) in [
            ("base_collab_prob", self.base_collab_prob),
            ("intl_prob", self.intl_prob),
            ("corp_prob", self.corp_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.n_authors == 0 {
            return Err(SynthError::Infeasible("n_authors = 0 produces no publications".into()));
        }
        if self.n_cohort == 0 || self.n_cohort > self.n_authors {
            return bad(format!("n_cohort = {} must be in 1..=n_authors", self.n_cohort));
        }
        if self.pubs_per_author_year.is_nan() || self.pubs_per_author_year < 0.0 {
            return bad("pubs_per_author_year must be >= 0".into());
        }
        if self.pubs_per_author_year == 0.0 {
            return Err(SynthError::Infeasible("pubs_per_author_year = 0 produces no publications".into()));
        }
        if self.cohort_boost.is_nan() || self.cohort_boost < 1.0 {
            return bad("cohort_boost must be >= 1".into());
        }
        if self.years.is_empty() || !self.years.contains(self.program_start_year) {
            return bad(format!("program_start_year {} outside years {}", self.program_start_year, self.years));
        }
        if self.stagger_years as usize >= self.years.len() {
            return bad("stagger_years must be shorter than the simulated span".into());
        }
        if self.years.from < crate::corpus::MIN_YEAR {
            return bad(format!("years must start at or after {}", crate::corpus::MIN_YEAR));
        }
        if self.fields.is_empty() {
            return bad("at least one field is required".into());
        }
        if self.fields.iter().any(|f| !f.mu.is_finite() || !(f.sigma >= 0.0) || f.name.is_empty()) {
            return bad("field specs need a name, finite mu and sigma >= 0".into());
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<SynthConfig, SynthError> {
        let mut cfg = SynthConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| SynthError::Config(format!("line {}: {m}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(&format!("`{v}` is not a number")));
            let int = |v: &str| v.parse::<u64>().map_err(|_| err(&format!("`{v}` is not a non-negative integer")));
            match key {
                "n_authors" => cfg.n_authors = int(value)? as usize,
                "n_cohort" => cfg.n_cohort = int(value)? as usize,
                "years" => cfg.years = value.parse().map_err(|_| err("years must be FROM:TO"))?,
                "program_start_year" => {
                    cfg.program_start_year = value.parse().map_err(|_| err("program_start_year must be a year"))?
                }
                "base_collab_prob" => cfg.base_collab_prob = num(value)?,
                "cohort_boost" => cfg.cohort_boost = num(value)?,
                "pubs_per_author_year" => cfg.pubs_per_author_year = num(value)?,
                "stagger_years" => cfg.stagger_years = int(value)? as u32,
                "intl_prob" => cfg.intl_prob = num(value)?,
                "corp_prob" => cfg.corp_prob = num(value)?,
                "seed" => cfg.seed = int(value)?,
                "fields" => {
                    cfg.fields = value
                        .split(',')
                        .map(|spec| {
                            let parts: Vec<&str> = spec.trim().split(':').collect();
                            match parts.as_slice() {
                                [name, mu, sigma] => Ok(FieldSpec { name: name.to_string(), mu: num(mu)?, sigma: num(sigma)? }),
                                _ => Err(err("fields entries are NAME:mu:sigma")),
                            }
                        })
                        .collect::<Result<_, _>>()?
                }
                other => return Err(err(&format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_authors = {}", self.n_authors);
        let _ = writeln!(s, "n_cohort = {}", self.n_cohort);
        let _ = writeln!(s, "years = {}", self.years);
        let _ = writeln!(s, "program_start_year = {}", self.program_start_year);
        let _ = writeln!(s, "base_collab_prob = {}", self.base_collab_prob);
        let _ = writeln!(s, "cohort_boost = {}", self.cohort_boost);
        let _ = writeln!(s, "pubs_per_author_year = {}", self.pubs_per_author_year);
        let _ = writeln!(s, "stagger_years = {}", self.stagger_years);
        let fields: Vec<String> = self.fields.iter().map(|f| format!("{}:{}:{}", f.name, f.mu, f.sigma)).collect();
        let _ = writeln!(s, "fields = {}", fields.join(", "));
        let _ = writeln!(s, "intl_prob = {}", self.intl_prob);
        let _ = writeln!(s, "corp_prob = {}", self.corp_prob);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
