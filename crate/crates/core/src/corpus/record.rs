use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::ids::{AuthorId, Eid};

/// Earliest publication year accepted by validation.
pub const MIN_YEAR: i32 = 1800;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Article,
    Review,
    Conference,
    Other,
}

impl DocType {
    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Conference => "conference",
            DocType::Other => "other",
        }
    }

    fn parse(s: &str) -> Option<DocType> {
        match s {
            "article" => Some(DocType::Article),
            "review" => Some(DocType::Review),
            "conference" => Some(DocType::Conference),
            "other" => Some(DocType::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Academic,
    Corporate,
    Government,
    Other,
}

impl Sector {
    fn parse(s: &str) -> Option<Sector> {
        match s {
            "academic" => Some(Sector::Academic),
            "corporate" => Some(Sector::Corporate),
            "government" => Some(Sector::Government),
            "other" => Some(Sector::Other),
            _ => None,
        }
    }
}

/// One indexed output. Empty `countries` / `sectors` mean "unknown".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub eid: Eid,
    pub year: i32,
    pub authors: Vec<AuthorId>,
    pub citations: u64,
    pub field: String,
    pub doctype: DocType,
    pub countries: BTreeSet<String>,
    pub sectors: BTreeSet<Sector>,
    pub patent_citations: u64,
    pub policy_citations: u64,
    pub blog_mentions: u64,
    pub news_mentions: u64,
    pub tweet_mentions: u64,
}

impl PublicationRecord {
    /// A minimal record with all optional attributes unknown or zero.
    pub fn new(eid: impl Into<String>, year: i32, authors: &[&str], citations: u64) -> Self {
        PublicationRecord {
            eid: Eid::new(eid),
            year,
            authors: authors.iter().map(|a| AuthorId::from(*a)).collect(),
            citations,
            field: "GEN".to_owned(),
            doctype: DocType::Article,
            countries: BTreeSet::new(),
            sectors: BTreeSet::new(),
            patent_citations: 0,
            policy_citations: 0,
            blog_mentions: 0,
            news_mentions: 0,
            tweet_mentions: 0,
        }
    }

    pub fn has_author(&self, author: &AuthorId) -> bool {
        self.authors.iter().any(|a| a == author)
    }

    pub fn is_international(&self) -> bool {
        self.countries.len() >= 2
    }

    pub fn is_academic_corporate(&self) -> bool {
        self.sectors.contains(&Sector::Academic) && self.sectors.contains(&Sector::Corporate)
    }
}

/// Counters that may be absent from a raw record and default to zero.
pub const OPTIONAL_COUNTERS: [&str; 5] = [
    "patent_citations",
    "policy_citations",
    "blog_mentions",
    "news_mentions",
    "tweet_mentions",
];

const KNOWN_FIELDS: [&str; 13] = [
    "eid",
    "year",
    "authors",
    "citations",
    "field",
    "doctype",
    "countries",
    "sectors",
    "patent_citations",
    "policy_citations",
    "blog_mentions",
    "news_mentions",
    "tweet_mentions",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Violation { field: field.to_owned(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Accept (and drop) unknown fields instead of rejecting the record.
    pub lenient: bool,
    /// Latest accepted year, normally the current year plus one.
    pub max_year: i32,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        use chrono::Datelike;
        ValidationOptions { lenient: false, max_year: chrono::Utc::now().year() + 1 }
    }
}

/// A record that passed validation, with non-fatal notes.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub record: PublicationRecord,
    pub warnings: Vec<String>,
    /// Optional counters absent from the raw record (defaulted to zero).
    pub missing_counters: Vec<&'static str>,
}

/// Validates and normalizes one parsed record. Either the normalized record
/// or every violation found is returned.
pub fn validate_record(
    raw: &Map<String, Value>,
    opts: &ValidationOptions,
) -> Result<Validated, Vec<Violation>> {
    let mut violations = Vec::new();
    let mut warnings = Vec::new();

    for key in raw.keys() {
        if !KNOWN_FIELDS.contains(&key.as_str()) {
            if opts.lenient {
                warnings.push(format!("ignored unknown field `{key}`"));
            } else {
                violations.push(Violation::new(key, "unknown field"));
            }
        }
    }

    let eid = match raw.get("eid") {
        Some(Value::String(s)) if !s.trim().is_empty() => Some(Eid::new(s.trim())),
        Some(Value::String(_)) => {
            violations.push(Violation::new("eid", "empty id"));
            None
        }
        Some(_) => {
            violations.push(Violation::new("eid", "expected string"));
            None
        }
        None => {
            violations.push(Violation::new("eid", "missing"));
            None
        }
    };

    let year = match raw.get("year") {
        Some(v) => match v.as_i64() {
            Some(y) if y < MIN_YEAR as i64 || y > opts.max_year as i64 => {
                violations.push(Violation::new(
                    "year",
                    format!("{y} outside [{MIN_YEAR}, {}]", opts.max_year),
                ));
                None
            }
            Some(y) => Some(y as i32),
            None => {
                violations.push(Violation::new("year", format!("expected integer, got {v}")));
                None
            }
        },
        None => {
            violations.push(Violation::new("year", "missing"));
            None
        }
    };

    let authors = match raw.get("authors") {
        Some(Value::Array(items)) => {
            let mut out: Vec<AuthorId> = Vec::with_capacity(items.len());
            let mut seen = std::collections::HashSet::with_capacity(items.len());
            let mut dupes = 0usize;
            let mut bad = false;
            for item in items {
                match item {
                    Value::String(s) if !s.trim().is_empty() => {
                        if seen.insert(s.trim()) {
                            out.push(AuthorId::new(s.trim()));
                        } else {
                            dupes += 1;
                        }
                    }
                    _ => bad = true,
                }
            }
            if bad {
                violations.push(Violation::new("authors", "expected non-empty string ids"));
                None
            } else if out.is_empty() {
                violations.push(Violation::new("authors", "empty author list"));
                None
            } else {
                if dupes > 0 {
                    warnings.push(format!("collapsed {dupes} duplicate author id(s)"));
                }
                Some(out)
            }
        }
        Some(_) => {
            violations.push(Violation::new("authors", "expected array"));
            None
        }
        None => {
            violations.push(Violation::new("authors", "missing"));
            None
        }
    };

    let citations = match raw.get("citations") {
        Some(v) => counter("citations", v, &mut violations),
        None => {
            violations.push(Violation::new("citations", "missing"));
            None
        }
    };

    let field = match raw.get("field") {
        Some(Value::String(s)) if !s.trim().is_empty() => Some(s.trim().to_owned()),
        Some(_) => {
            violations.push(Violation::new("field", "expected non-empty string"));
            None
        }
        None => {
            violations.push(Violation::new("field", "missing"));
            None
        }
    };

    let doctype = match raw.get("doctype") {
        Some(Value::String(s)) => match DocType::parse(&s.to_ascii_lowercase()) {
            Some(d) => Some(d),
            None => {
                violations.push(Violation::new("doctype", format!("unknown doctype `{s}`")));
                None
            }
        },
        Some(_) => {
            violations.push(Violation::new("doctype", "expected string"));
            None
        }
        None => {
            violations.push(Violation::new("doctype", "missing"));
            None
        }
    };

    let mut countries = BTreeSet::new();
    match raw.get("countries") {
        None | Some(Value::Null) => {}
        Some(Value::Array(items)) => {
            for item in items {
                match item.as_str() {
                    Some(c) if c.len() == 2 && c.chars().all(|ch| ch.is_ascii_alphabetic()) => {
                        countries.insert(c.to_ascii_uppercase());
                    }
                    _ => violations.push(Violation::new(
                        "countries",
                        format!("`{item}` is not an ISO-3166 alpha-2 code"),
                    )),
                }
            }
        }
        Some(_) => violations.push(Violation::new("countries", "expected array")),
    }

    let mut sectors = BTreeSet::new();
    match raw.get("sectors") {
        None | Some(Value::Null) => {}
        Some(Value::Array(items)) => {
            for item in items {
                match item.as_str().and_then(|s| Sector::parse(&s.to_ascii_lowercase())) {
                    Some(s) => {
                        sectors.insert(s);
                    }
                    None => violations.push(Violation::new("sectors", format!("unknown sector {item}"))),
                }
            }
        }
        Some(_) => violations.push(Violation::new("sectors", "expected array")),
    }

    let mut optional = [0u64; 5];
    let mut missing_counters = Vec::new();
    for (slot, name) in optional.iter_mut().zip(OPTIONAL_COUNTERS) {
        match raw.get(name) {
            None | Some(Value::Null) => missing_counters.push(name),
            Some(v) => {
                if let Some(c) = counter(name, v, &mut violations) {
                    *slot = c;
                }
            }
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }
    let [patent_citations, policy_citations, blog_mentions, news_mentions, tweet_mentions] = optional;
    Ok(Validated {
        record: PublicationRecord {
            eid: eid.expect("checked"),
            year: year.expect("checked"),
            authors: authors.expect("checked"),
            citations: citations.expect("checked"),
            field: field.expect("checked"),
            doctype: doctype.expect("checked"),
            countries,
            sectors,
            patent_citations,
            policy_citations,
            blog_mentions,
            news_mentions,
            tweet_mentions,
        },
        warnings,
        missing_counters,
    })
}

fn counter(name: &str, v: &Value, violations: &mut Vec<Violation>) -> Option<u64> {
    if let Some(c) = v.as_u64() {
        return Some(c);
    }
    match v.as_i64() {
        Some(_) => violations.push(Violation::new(name, "negative counter")),
        None => match v.as_f64() {
            Some(f) if f < 0.0 => violations.push(Violation::new(name, "negative counter")),
            _ => violations.push(Violation::new(name, format!("expected non-negative integer, got {v}"))),
        },
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn opts() -> ValidationOptions {
        ValidationOptions { lenient: false, max_year: 2026 }
    }

    fn base() -> Map<String, Value> {
        json!({
            "eid": "2-s2.0-1", "year": 1999, "authors": ["A1", "A2"], "citations": 4,
            "field": "PHYS", "doctype": "article", "countries": ["CA"], "sectors": ["academic"],
            "patent_citations": 0, "policy_citations": 0, "blog_mentions": 0,
            "news_mentions": 0, "tweet_mentions": 0
        })
        .as_object()
        .unwrap()
        .clone()
    }

    #[test]
    fn duplicate_authors_collapse_with_warning() {
        let mut raw = base();
        raw.insert("authors".into(), json!(["A1", "A1", "A2"]));
        let v = validate_record(&raw, &opts()).unwrap();
        assert_eq!(v.record.authors, vec![AuthorId::from("A1"), AuthorId::from("A2")]);
        assert_eq!(v.warnings.len(), 1);
    }

    #[test]
    fn negative_counter_is_a_violation() {
        let mut raw = base();
        raw.insert("citations".into(), json!(-3));
        let errs = validate_record(&raw, &opts()).unwrap_err();
        assert_eq!(errs, vec![Violation::new("citations", "negative counter")]);
    }

    #[test]
    fn countries_are_upper_cased() {
        let mut raw = base();
        raw.insert("countries".into(), json!(["ca", "US"]));
        let v = validate_record(&raw, &opts()).unwrap();
        let expected: BTreeSet<String> = ["CA", "US"].iter().map(|s| s.to_string()).collect();
        assert_eq!(v.record.countries, expected);
    }

    #[test]
    fn all_violations_are_reported() {
        let mut raw = base();
        raw.insert("year".into(), json!("banana"));
        raw.insert("authors".into(), json!([]));
        raw.insert("tweet_mentions".into(), json!(-1));
        raw.insert("extra".into(), json!(1));
        let errs = validate_record(&raw, &opts()).unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|v| v.field.as_str()).collect();
        assert_eq!(fields, vec!["extra", "year", "authors", "tweet_mentions"]);
    }

    #[test]
    fn lenient_drops_unknown_fields() {
        let mut raw = base();
        raw.insert("extra".into(), json!(1));
        let v = validate_record(&raw, &ValidationOptions { lenient: true, ..opts() }).unwrap();
        assert_eq!(v.warnings.len(), 1);
    }

    #[test]
    fn missing_optional_counters_default_to_zero() {
        let mut raw = base();
        raw.remove("tweet_mentions");
        raw.remove("countries");
        let v = validate_record(&raw, &opts()).unwrap();
        assert_eq!(v.record.tweet_mentions, 0);
        assert_eq!(v.missing_counters, vec!["tweet_mentions"]);
        assert!(v.record.countries.is_empty());
    }

    #[test]
    fn year_bounds() {
        let mut raw = base();
        raw.insert("year".into(), json!(1799));
        assert!(validate_record(&raw, &opts()).is_err());
        raw.insert("year".into(), json!(2027));
        assert!(validate_record(&raw, &opts()).is_err());
        raw.insert("year".into(), json!(2026));
        assert!(validate_record(&raw, &opts()).is_ok());
    }
}
