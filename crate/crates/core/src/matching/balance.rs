//! Covariate balance diagnostics on raw (unstandardized) covariates.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{COVARIATES, NCOV};
use crate::profiles::Covariate;
use crate::stats::{mean, sample_variance};

/// Standardized mean difference. `Degenerate` when both groups have zero
/// variance but different means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Smd {
    Value(f64),
    Degenerate,
}

impl Smd {
    pub fn value(self) -> Option<f64> {
        match self {
            Smd::Value(v) => Some(v),
            Smd::Degenerate => None,
        }
    }
}

impl fmt::Display for Smd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smd::Value(v) => write!(f, "{v}"),
            Smd::Degenerate => f.write_str("degenerate"),
        }
    }
}

/// `|mean_a - mean_b| / sqrt((var_a + var_b) / 2)` with sample variances.
pub fn smd(a: &[f64], b: &[f64]) -> Smd {
    let diff = (mean(a) - mean(b)).abs();
    let pooled = ((sample_variance(a) + sample_variance(b)) / 2.0).sqrt();
    if pooled > 0.0 {
        Smd::Value(diff / pooled)
    } else if diff == 0.0 {
        Smd::Value(0.0)
    } else {
        Smd::Degenerate
    }
}

/// `var_a / var_b`; `None` when `var_b` is zero.
pub fn variance_ratio(a: &[f64], b: &[f64]) -> Option<f64> {
    let vb = sample_variance(b);
    (vb > 0.0).then(|| sample_variance(a) / vb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateBalance {
    pub covariate: Covariate,
    pub smd_before: Smd,
    pub smd_after: Smd,
    pub variance_ratio_before: Option<f64>,
    pub variance_ratio_after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BalanceReport {
    pub covariates: Vec<CovariateBalance>,
}

impl BalanceReport {
    pub fn get(&self, c: Covariate) -> Option<&CovariateBalance> {
        self.covariates.iter().find(|b| b.covariate == c)
    }

    /// Comment-prefixed block appended to the pairs table.
    pub fn to_block(&self) -> String {
        let fmt_ratio = |r: Option<f64>| r.map_or_else(|| "undefined".to_owned(), |v| v.to_string());
        let mut out = String::new();
        for b in &self.covariates {
            out.push_str(&format!(
                "# balance {} smd_before={} smd_after={} variance_ratio_before={} variance_ratio_after={}\n",
                b.covariate,
                b.smd_before,
                b.smd_after,
                fmt_ratio(b.variance_ratio_before),
                fmt_ratio(b.variance_ratio_after)
            ));
        }
        out
    }
}

/// Balance of focal vs. whole pool (before) and focal vs. matched controls
/// (after), per matching covariate.
pub fn balance_report(focal: &[[f64; NCOV]], pool: &[[f64; NCOV]], controls: &[[f64; NCOV]]) -> BalanceReport {
    let column = |rows: &[[f64; NCOV]], k: usize| -> Vec<f64> { rows.iter().map(|r| r[k]).collect() };
    let covariates = COVARIATES
        .iter()
        .enumerate()
        .map(|(k, &covariate)| {
            let f = column(focal, k);
            let p = column(pool, k);
            let c = column(controls, k);
            CovariateBalance {
                covariate,
                smd_before: smd(&f, &p),
                smd_after: smd(&f, &c),
                variance_ratio_before: variance_ratio(&f, &p),
                variance_ratio_after: variance_ratio(&f, &c),
            }
        })
        .collect();
    BalanceReport { covariates }
}
