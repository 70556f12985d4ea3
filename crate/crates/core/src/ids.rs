//! Identifier newtypes shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Opaque author identifier (a database author profile id).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthorId(String);

impl AuthorId {
    pub fn new(id: impl Into<String>) -> Self {
        AuthorId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AuthorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AuthorId {
    fn from(s: &str) -> Self {
        AuthorId(s.to_owned())
    }
}

impl From<String> for AuthorId {
    fn from(s: String) -> Self {
        AuthorId(s)
    }
}

/// Opaque unique publication identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Eid(String);

impl Eid {
    pub fn new(id: impl Into<String>) -> Self {
        Eid(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Eid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Eid {
    fn from(s: &str) -> Self {
        Eid(s.to_owned())
    }
}

/// Inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearRange {
    pub from: i32,
    pub to: i32,
}

impl YearRange {
    pub fn new(from: i32, to: i32) -> Self {
        YearRange { from, to }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.from <= year && year <= self.to
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.from..=self.to
    }

    /// Number of calendar years covered; zero for an inverted range.
    pub fn len(&self) -> usize {
        if self.to < self.from {
            0
        } else {
            (self.to - self.from + 1) as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid year range {0:?}, expected FROM:TO with FROM <= TO")]
pub struct YearRangeParseError(String);

impl FromStr for YearRange {
    type Err = YearRangeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || YearRangeParseError(s.to_owned());
        let (a, b) = s.split_once(':').ok_or_else(err)?;
        let from: i32 = a.trim().parse().map_err(|_| err())?;
        let to: i32 = b.trim().parse().map_err(|_| err())?;
        if from > to {
            return Err(err());
        }
        Ok(YearRange { from, to })
    }
}
