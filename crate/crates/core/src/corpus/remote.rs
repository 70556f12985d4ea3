//! Contract for paged remote bibliographic sources, and a fetch loop that
//! honours rate limits and retries transport failures with backoff.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use serde_json::{Map, Value};

use crate::ids::{AuthorId, YearRange};

/// One request for a page of results.
#[derive(Debug, Clone)]
pub struct PageRequest<'a> {
    pub authors: &'a [AuthorId],
    pub window: YearRange,
    /// Opaque cursor returned by the previous page; `None` for the first.
    pub cursor: Option<&'a str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub records: Vec<Value>,
    /// Cursor for the following page; `None` once the result set is exhausted.
    pub next_cursor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SourceError {
    /// Retryable failure (network, throttling, 5xx).
    #[error("transport: {0}")]
    Transport(String),
    /// The page does not match the expected layout; retrying will not help.
    #[error("schema drift: {0}")]
    SchemaDrift(String),
}

/// A paged source of raw publication records. Re-requesting a page with the
/// same cursor must return the same records.
pub trait RemoteSource {
    /// Minimum spacing between consecutive requests.
    fn min_request_interval(&self) -> Duration;

    fn fetch_page(&mut self, request: &PageRequest<'_>) -> Result<Page, SourceError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 5,
            base_delay: Duration::from_millis(250),
            max_delay: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (1-based): base * 2^(attempt-1), capped.
    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt.saturating_sub(1)).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

/// Progress at the time a fetch stopped, enough to resume from `last_cursor`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FetchManifest {
    pub pages_completed: usize,
    pub records_yielded: usize,
    pub retries: usize,
    pub last_cursor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FetchError {
    #[error("fetch aborted after {} page(s): {reason}", .manifest.pages_completed)]
    Aborted { reason: SourceError, manifest: FetchManifest },
}

/// Iterator over raw records from a [`RemoteSource`].
pub struct RemoteFetch<'a, S: RemoteSource> {
    source: &'a mut S,
    authors: &'a [AuthorId],
    window: YearRange,
    policy: RetryPolicy,
    buffer: VecDeque<Map<String, Value>>,
    cursor: Option<String>,
    exhausted: bool,
    failed: bool,
    last_request: Option<Instant>,
    manifest: FetchManifest,
}

/// Starts fetching all records for `authors` within `window`.
pub fn fetch_remote<'a, S: RemoteSource>(
    source: &'a mut S,
    authors: &'a [AuthorId],
    window: YearRange,
    policy: RetryPolicy,
) -> RemoteFetch<'a, S> {
    RemoteFetch {
        source,
        authors,
        window,
        policy,
        buffer: VecDeque::new(),
        cursor: None,
        exhausted: false,
        failed: false,
        last_request: None,
        manifest: FetchManifest::default(),
    }
}

impl<S: RemoteSource> RemoteFetch<'_, S> {
    pub fn manifest(&self) -> &FetchManifest {
        &self.manifest
    }

    fn throttle(&mut self) {
        let gap = self.source.min_request_interval();
        if let Some(prev) = self.last_request {
            let elapsed = prev.elapsed();
            if elapsed < gap {
                std::thread::sleep(gap - elapsed);
            }
        }
        self.last_request = Some(Instant::now());
    }

    fn next_page(&mut self) -> Result<(), FetchError> {
        let mut attempt = 0u32;
        loop {
            self.throttle();
            let request = PageRequest {
                authors: self.authors,
                window: self.window,
                cursor: self.cursor.as_deref(),
            };
            match self.source.fetch_page(&request) {
                Ok(page) => return self.accept(page),
                Err(SourceError::Transport(msg)) if attempt < self.policy.max_retries => {
                    attempt += 1;
                    self.manifest.retries += 1;
                    let delay = self.policy.delay(attempt);
                    log::warn!(
                        "page {} failed ({msg}); retry {attempt}/{} in {delay:?}",
                        self.manifest.pages_completed + 1,
                        self.policy.max_retries
                    );
                    std::thread::sleep(delay);
                }
                Err(reason) => {
                    return Err(FetchError::Aborted { reason, manifest: self.manifest.clone() });
                }
            }
        }
    }

    fn accept(&mut self, page: Page) -> Result<(), FetchError> {
        let mut records = Vec::with_capacity(page.records.len());
        for (i, v) in page.records.into_iter().enumerate() {
            match v {
                Value::Object(map) => records.push(map),
                _ => {
                    return Err(FetchError::Aborted {
                        reason: SourceError::SchemaDrift(format!("record {i} is not an object")),
                        manifest: self.manifest.clone(),
                    })
                }
            }
        }
        self.buffer.extend(records);
        self.manifest.pages_completed += 1;
        self.manifest.last_cursor = page.next_cursor.clone();
        match page.next_cursor {
            Some(c) => self.cursor = Some(c),
            None => self.exhausted = true,
        }
        Ok(())
    }
}

impl<S: RemoteSource> Iterator for RemoteFetch<'_, S> {
    type Item = Result<Map<String, Value>, FetchError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(r) = self.buffer.pop_front() {
                self.manifest.records_yielded += 1;
                return Some(Ok(r));
            }
            if self.exhausted || self.failed {
                return None;
            }
            if let Err(e) = self.next_page() {
                self.failed = true;
                return Some(Err(e));
            }
        }
    }
}

/// Drains a fetch and orders the records by eid, so that results merged from
/// concurrent fetches are deterministic.
pub fn collect_sorted<I>(fetches: I) -> Result<Vec<Map<String, Value>>, FetchError>
where
    I: IntoIterator<Item = Result<Map<String, Value>, FetchError>>,
{
    let mut out = fetches.into_iter().collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| eid_of(a).cmp(eid_of(b)));
    Ok(out)
}

fn eid_of(m: &Map<String, Value>) -> &str {
    m.get("eid").and_then(Value::as_str).unwrap_or("")
}
