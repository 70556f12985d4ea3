//! Counterfactual-cohort evaluation of convened research programs.
//!
//! The crate takes a publication corpus and a focal cohort, builds a matched
//! control cohort from the focal cohort's co-author pool, and compares the
//! two through cumulative co-authorship networks and bibliometric panels.

pub mod corpus;
mod fsutil;
pub mod ids;
pub mod matching;
pub mod metrics;
pub mod netgraph;
pub mod par;
pub mod profiles;
pub mod stats;
pub mod synthlab;

pub use fsutil::write_atomic;
pub use ids::{AuthorId, Eid, YearRange};
