//! Publication corpora: the record schema, validation, line-delimited JSON
//! persistence, cohort files and the remote-source fetch contract.

mod record;
pub mod remote;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde_json::Value;

pub use record::{
    validate_record, DocType, PublicationRecord, Sector, Validated, ValidationOptions, Violation,
    MIN_YEAR, OPTIONAL_COUNTERS,
};

use crate::ids::{AuthorId, Eid, YearRange};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate eid `{eid}` on lines {first_line} and {second_line}")]
    DuplicateEid { eid: Eid, first_line: usize, second_line: usize },
    #[error("{} unparseable line(s), first at line {}: {}", .lines.len(), .lines[0].0, .lines[0].1)]
    Syntax { lines: Vec<(usize, String)> },
    #[error("cohort file: {0}")]
    Cohort(String),
}

/// A validated, immutable publication universe. Records are kept sorted by
/// eid; the author index maps each author to the positions of their records.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<PublicationRecord>,
    by_eid: HashMap<Eid, usize>,
    author_index: BTreeMap<AuthorId, Vec<usize>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records && self.author_index == other.author_index
    }
}

impl Corpus {
    /// Builds a corpus from already validated records. Fails on duplicate eids
    /// (line numbers in the error are 1-based input positions).
    pub fn from_records(mut records: Vec<PublicationRecord>) -> Result<Corpus, CorpusError> {
        let mut order: Vec<usize> = (0..records.len()).collect();
        order.sort_by(|&a, &b| records[a].eid.cmp(&records[b].eid).then(a.cmp(&b)));
        for w in order.windows(2) {
            if records[w[0]].eid == records[w[1]].eid {
                return Err(CorpusError::DuplicateEid {
                    eid: records[w[0]].eid.clone(),
                    first_line: w[0] + 1,
                    second_line: w[1] + 1,
                });
            }
        }
        records.sort_by(|a, b| a.eid.cmp(&b.eid));
        let by_eid = records.iter().enumerate().map(|(i, r)| (r.eid.clone(), i)).collect();
        let author_index = build_author_index(&records);
        Ok(Corpus { records, by_eid, author_index })
    }

    pub fn records(&self) -> &[PublicationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, eid: &Eid) -> Option<&PublicationRecord> {
        self.by_eid.get(eid).map(|&i| &self.records[i])
    }

    pub fn position(&self, eid: &Eid) -> Option<usize> {
        self.by_eid.get(eid).copied()
    }

    /// Record positions authored by `author`, ascending (hence eid order).
    pub fn author_records(&self, author: &AuthorId) -> &[usize] {
        self.author_index.get(author).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains_author(&self, author: &AuthorId) -> bool {
        self.author_index.contains_key(author)
    }

    pub fn authors(&self) -> impl Iterator<Item = &AuthorId> {
        self.author_index.keys()
    }

    pub fn author_count(&self) -> usize {
        self.author_index.len()
    }

    /// Author index expressed as eids.
    pub fn author_index(&self) -> BTreeMap<AuthorId, BTreeSet<Eid>> {
        self.author_index
            .iter()
            .map(|(a, idx)| (a.clone(), idx.iter().map(|&i| self.records[i].eid.clone()).collect()))
            .collect()
    }

    /// Recomputes the author index from the records and reports whether it
    /// equals the stored one.
    pub fn index_is_consistent(&self) -> bool {
        build_author_index(&self.records) == self.author_index
    }

    pub fn year_range(&self) -> Option<YearRange> {
        let lo = self.records.iter().map(|r| r.year).min()?;
        let hi = self.records.iter().map(|r| r.year).max()?;
        Some(YearRange::new(lo, hi))
    }

    /// Line-delimited JSON, one record per line in eid order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

fn build_author_index(records: &[PublicationRecord]) -> BTreeMap<AuthorId, Vec<usize>> {
    let mut index: BTreeMap<AuthorId, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        for a in &r.authors {
            index.entry(a.clone()).or_default().push(i);
        }
    }
    index
}

/// A record line that failed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub line: usize,
    pub violations: Vec<Violation>,
}

/// Everything noteworthy that happened while loading a corpus file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub lines_read: usize,
    pub accepted: usize,
    pub rejected: Vec<Rejected>,
    /// Unparseable lines tolerated under `lenient`.
    pub syntax_errors: Vec<(usize, String)>,
    pub warnings: Vec<(usize, String)>,
    /// Optional counter name → number of accepted records lacking it.
    pub missing_counters: BTreeMap<String, usize>,
}

impl LoadReport {
    pub fn is_clean(&self) -> bool {
        self.rejected.is_empty() && self.syntax_errors.is_empty() && self.warnings.is_empty()
    }
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lines={} accepted={} rejected={} syntax_errors={}",
            self.lines_read,
            self.accepted,
            self.rejected.len(),
            self.syntax_errors.len()
        )?;
        for r in &self.rejected {
            let msgs: Vec<String> = r.violations.iter().map(ToString::to_string).collect();
            writeln!(f, "line {}: rejected: {}", r.line, msgs.join("; "))?;
        }
        for (line, msg) in &self.syntax_errors {
            writeln!(f, "line {line}: unparseable: {msg}")?;
        }
        for (line, msg) in &self.warnings {
            writeln!(f, "line {line}: warning: {msg}")?;
        }
        for (name, n) in &self.missing_counters {
            writeln!(f, "coverage: {n} record(s) lack `{name}` (counted as 0)")?;
        }
        Ok(())
    }
}

/// Loads a line-delimited corpus file.
pub fn load_corpus(path: &Path, opts: &ValidationOptions) -> Result<(Corpus, LoadReport), CorpusError> {
    let file = std::fs::File::open(path)
        .map_err(|source| CorpusError::Io { path: path.to_owned(), source })?;
    read_corpus(std::io::BufReader::new(file), opts).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::Io { path: path.to_owned(), source },
        other => other,
    })
}

/// Reads a corpus from any line source. Blank lines are ignored.
pub fn read_corpus<R: BufRead>(reader: R, opts: &ValidationOptions) -> Result<(Corpus, LoadReport), CorpusError> {
    let mut report = LoadReport::default();
    let mut records = Vec::new();
    let mut lines_of = Vec::new();
    let mut first_line: HashMap<Eid, usize> = HashMap::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|source| CorpusError::Io { path: PathBuf::new(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        report.lines_read += 1;
        let raw = match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(map)) => map,
            Ok(other) => {
                report.syntax_errors.push((lineno, format!("expected an object, got {}", kind(&other))));
                continue;
            }
            Err(e) => {
                report.syntax_errors.push((lineno, e.to_string()));
                continue;
            }
        };
        match validate_record(&raw, opts) {
            Ok(v) => {
                if let Some(&prev) = first_line.get(&v.record.eid) {
                    return Err(CorpusError::DuplicateEid {
                        eid: v.record.eid,
                        first_line: prev,
                        second_line: lineno,
                    });
                }
                first_line.insert(v.record.eid.clone(), lineno);
                for w in v.warnings {
                    report.warnings.push((lineno, w));
                }
                for name in v.missing_counters {
                    *report.missing_counters.entry(name.to_owned()).or_default() += 1;
                }
                records.push(v.record);
                lines_of.push(lineno);
            }
            Err(violations) => report.rejected.push(Rejected { line: lineno, violations }),
        }
    }

    if !report.syntax_errors.is_empty() && !opts.lenient {
        return Err(CorpusError::Syntax { lines: report.syntax_errors });
    }
    report.accepted = records.len();
    let corpus = Corpus::from_records(records).map_err(|e| match e {
        CorpusError::DuplicateEid { eid, first_line, second_line } => CorpusError::DuplicateEid {
            eid,
            first_line: lines_of[first_line - 1],
            second_line: lines_of[second_line - 1],
        },
        other => other,
    })?;
    Ok((corpus, report))
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// Writes the corpus as line-delimited JSON (eid order), atomically.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    crate::fsutil::write_atomic(path, corpus.to_jsonl().as_bytes())
        .map_err(|source| CorpusError::Io { path: path.to_owned(), source })
}

/// A named group of authors and the year their program began.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohortSpec {
    pub name: String,
    pub members: BTreeSet<AuthorId>,
    pub program_start_year: i32,
}

impl CohortSpec {
    /// Parses the cohort text format: a header `# name=<str> start=<year>`
    /// followed by one author id per line. Other `#` lines are comments.
    pub fn parse(text: &str) -> Result<CohortSpec, CorpusError> {
        let err = |m: String| CorpusError::Cohort(m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| err("empty file".into()))?;
        let body = header
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| err(format!("missing header line, got `{header}`")))?;
        let mut name = None;
        let mut start = None;
        for tok in body.split_whitespace() {
            if let Some(v) = tok.strip_prefix("name=") {
                name = Some(v.to_owned());
            } else if let Some(v) = tok.strip_prefix("start=") {
                start = Some(v.parse::<i32>().map_err(|_| err(format!("bad start year `{v}`")))?);
            }
        }
        let name = name.ok_or_else(|| err("header lacks name=".into()))?;
        let program_start_year = start.ok_or_else(|| err("header lacks start=".into()))?;
        let members: BTreeSet<AuthorId> = lines
            .map(str::trim)
            .filter(|l| !l.starts_with('#'))
            .map(AuthorId::from)
            .collect();
        if members.is_empty() {
            return Err(err("cohort has no members".into()));
        }
        Ok(CohortSpec { name, members, program_start_year })
    }

    pub fn load(path: &Path) -> Result<CohortSpec, CorpusError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CorpusError::Io { path: path.to_owned(), source })?;
        CohortSpec::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# name={} start={}\n", self.name, self.program_start_year);
        for m in &self.members {
            out.push_str(m.as_str());
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CorpusError> {
        crate::fsutil::write_atomic(path, self.to_text().as_bytes())
            .map_err(|source| CorpusError::Io { path: path.to_owned(), source })
    }

    /// Checks the cohort against a corpus: start year inside the corpus year
    /// range. Returns members absent from the corpus.
    pub fn check_against(&self, corpus: &Corpus) -> Result<Vec<AuthorId>, CorpusError> {
        if let Some(range) = corpus.year_range() {
            if !range.contains(self.program_start_year) {
                return Err(CorpusError::Cohort(format!(
                    "start year {} outside corpus years {range}",
                    self.program_start_year
                )));
            }
        }
        Ok(self.members.iter().filter(|m| !corpus.contains_author(m)).cloned().collect())
    }
}
