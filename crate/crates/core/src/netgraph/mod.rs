//! Cumulative co-authorship networks among a group's members, their density
//! over time, and circular-layout figure export.

mod render;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use render::{circular_layout, render_circular, Chord, LayoutFigure, NodePosition, Style};

use crate::corpus::Corpus;
use crate::ids::{AuthorId, Eid};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("a network needs at least 2 members, got {0}")]
    TooFewMembers(usize),
    #[error("cutoff years must be ascending")]
    UnsortedCutoffs,
    #[error("unsupported style key `{0}`")]
    UnsupportedStyle(String),
    #[error("invalid value `{value}` for style key `{key}`")]
    BadStyleValue { key: String, value: String },
}

/// A tie between two members: the publications establishing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// Shared publication ids with their publication years.
    pub eids: BTreeMap<Eid, i32>,
    pub first_year: i32,
}

impl Edge {
    pub fn weight(&self) -> u64 {
        self.eids.len() as u64
    }
}

/// Co-authorship graph among group members using records up to
/// `cutoff_year` inclusive. Nodes are sorted by id; edge keys are node
/// index pairs `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoAuthorNetwork {
    pub nodes: Vec<AuthorId>,
    pub edges: BTreeMap<(usize, usize), Edge>,
    pub cutoff_year: i32,
    /// Members with no record in the corpus; present as isolated nodes.
    pub missing: Vec<AuthorId>,
}

impl CoAuthorNetwork {
    pub fn node_index(&self, id: &AuthorId) -> Option<usize> {
        self.nodes.binary_search(id).ok()
    }

    /// Symmetric edge lookup.
    pub fn edge(&self, a: &AuthorId, b: &AuthorId) -> Option<&Edge> {
        let (i, j) = (self.node_index(a)?, self.node_index(b)?);
        self.edges.get(&(i.min(j), i.max(j)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(Edge::weight).sum()
    }

    /// Adjacency list: one `author_a author_b eid year` line per shared record.
    pub fn to_adjacency_list(&self) -> String {
        let mut out = String::new();
        for (&(i, j), e) in &self.edges {
            for (eid, year) in &e.eids {
                out.push_str(&format!("{} {} {} {}\n", self.nodes[i], self.nodes[j], eid, year));
            }
        }
        out
    }

    /// Undirected graph description with node ids and weighted edges.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph \"{}\" {{\n", name.replace('"', "'"));
        for n in &self.nodes {
            out.push_str(&format!("  \"{n}\";\n"));
        }
        for (&(i, j), e) in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [weight={}, first_year={}];\n",
                self.nodes[i],
                self.nodes[j],
                e.weight(),
                e.first_year
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the cumulative network among `members` from records dated on or
/// before `cutoff_year`.
pub fn build_network(corpus: &Corpus, members: &BTreeSet<AuthorId>, cutoff_year: i32) -> Result<CoAuthorNetwork, NetworkError> {
    if members.len() < 2 {
        return Err(NetworkError::TooFewMembers(members.len()));
    }
    let nodes: Vec<AuthorId> = members.iter().cloned().collect();
    let index: HashMap<&AuthorId, usize> = nodes.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let missing: Vec<AuthorId> = nodes.iter().filter(|a| !corpus.contains_author(a)).cloned().collect();
    if !missing.is_empty() {
        log::warn!("{} member(s) have no records and appear as isolated nodes", missing.len());
    }

    let positions: BTreeSet<usize> = nodes.iter().flat_map(|a| corpus.author_records(a).iter().copied()).collect();
    let mut edges: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
    for &p in &positions {
        let r = &corpus.records()[p];
        if r.year > cutoff_year {
            continue;
        }
        let mut on: Vec<usize> = r.authors.iter().filter_map(|a| index.get(a).copied()).collect();
        if on.len() < 2 {
            continue;
        }
        on.sort_unstable();
        for x in 0..on.len() {
            for y in x + 1..on.len() {
                let e = edges
                    .entry((on[x], on[y]))
                    .or_insert_with(|| Edge { eids: BTreeMap::new(), first_year: r.year });
                e.eids.insert(r.eid.clone(), r.year);
                e.first_year = e.first_year.min(r.year);
            }
        }
    }
    Ok(CoAuthorNetwork { nodes, edges, cutoff_year, missing })
}

/// Simple-graph density: edges over n(n-1)/2, ignoring weights.
pub fn density(net: &CoAuthorNetwork) -> f64 {
    let n = net.nodes.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    net.edge_count() as f64 / (n * (n - 1.0) / 2.0)
}

/// Density at each cutoff. Networks are cumulative, so the series is
/// non-decreasing.
pub fn density_series(corpus: &Corpus, members: &BTreeSet<AuthorId>, years: &[i32]) -> Result<Vec<(i32, f64)>, NetworkError> {
    if years.windows(2).any(|w| w[0] > w[1]) {
        return Err(NetworkError::UnsortedCutoffs);
    }
    let Some(&last) = years.last() else {
        if members.len() < 2 {
            return Err(NetworkError::TooFewMembers(members.len()));
        }
        return Ok(Vec::new());
    };
    let full = build_network(corpus, members, last)?;
    let n = full.nodes.len() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    let mut first_years: Vec<i32> = full.edges.values().map(|e| e.first_year).collect();
    first_years.sort_unstable();
    Ok(years
        .iter()
        .map(|&y| {
            let edges = first_years.partition_point(|&fy| fy <= y);
            (y, edges as f64 / pairs)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PublicationRecord;

    fn ids(xs: &[&str]) -> BTreeSet<AuthorId> {
        xs.iter().map(|s| AuthorId::from(*s)).collect()
    }

    fn corpus(records: Vec<PublicationRecord>) -> Corpus {
        Corpus::from_records(records).unwrap()
    }

    #[test]
    fn cutoff_is_inclusive() {
        let c = corpus(vec![PublicationRecord::new("e1", 1990, &["A", "B"], 0)]);
        let m = ids(&["A", "B"]);
        assert_eq!(build_network(&c, &m, 1989).unwrap().edge_count(), 0);
        let net = build_network(&c, &m, 1990).unwrap();
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.edge(&"B".into(), &"A".into()).unwrap().weight(), 1);
    }

    #[test]
    fn one_publication_makes_a_triangle() {
        let c = corpus(vec![PublicationRecord::new("e1", 1990, &["A", "B", "C", "X"], 0)]);
        let net = build_network(&c, &ids(&["A", "B", "C"]), 2000).unwrap();
        assert_eq!(net.edge_count(), 3);
        assert!(net.edges.values().all(|e| e.weight() == 1 && e.eids.contains_key(&Eid::from("e1"))));
        assert_eq!(density(&net), 1.0);
    }

    #[test]
    fn edgeless_density_is_zero() {
        let c = corpus(vec![PublicationRecord::new("e1", 1990, &["A"], 0), PublicationRecord::new("e2", 1990, &["B"], 0)]);
        assert_eq!(density(&build_network(&c, &ids(&["A", "B"]), 2000).unwrap()), 0.0);
    }

    #[test]
    fn too_few_members() {
        let c = corpus(vec![]);
        assert_eq!(build_network(&c, &ids(&["A"]), 2000), Err(NetworkError::TooFewMembers(1)));
    }

    #[test]
    fn missing_members_are_isolated() {
        let c = corpus(vec![PublicationRecord::new("e1", 1990, &["A", "B"], 0)]);
        let net = build_network(&c, &ids(&["A", "B", "Z"]), 2000).unwrap();
        assert_eq!(net.nodes.len(), 3);
        assert_eq!(net.missing, vec![AuthorId::from("Z")]);
        assert!((density(&net) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn series_over_single_shared_record() {
        let c = corpus(vec![PublicationRecord::new("e1", 1990, &["A", "B"], 0), PublicationRecord::new("e2", 1970, &["C"], 0)]);
        let s = density_series(&c, &ids(&["A", "B", "C"]), &[1980, 1995, 2020]).unwrap();
        assert_eq!(s[0].1, 0.0);
        assert!(s[1].1 > 0.0);
        assert_eq!(s[1].1, s[2].1);
        assert_eq!(density_series(&c, &ids(&["A", "B"]), &[2000, 1990]), Err(NetworkError::UnsortedCutoffs));
    }

    #[test]
    fn planted_pairs_density() {
        // 93 members, 500 distinct planted pairs
        let members: Vec<String> = (0..93).map(|i| format!("M{i:02}")).collect();
        let mut recs = Vec::new();
        let mut k = 0;
        'outer: for i in 0..93 {
            for j in i + 1..93 {
                if k == 500 {
                    break 'outer;
                }
                recs.push(PublicationRecord::new(format!("e{k}"), 2000, &[&members[i], &members[j]], 0));
                k += 1;
            }
        }
        let m: BTreeSet<AuthorId> = members.iter().map(|s| AuthorId::from(s.as_str())).collect();
        let net = build_network(&corpus(recs), &m, 2000).unwrap();
        assert_eq!(density(&net), 500.0 / 4278.0);
    }

    #[test]
    fn exports() {
        let c = corpus(vec![
            PublicationRecord::new("e1", 1990, &["A", "B"], 0),
            PublicationRecord::new("e2", 1992, &["B", "A"], 0),
        ]);
        let net = build_network(&c, &ids(&["A", "B"]), 2000).unwrap();
        assert_eq!(net.to_adjacency_list(), "A B e1 1990\nA B e2 1992\n");
        assert!(net.to_dot("g").contains("\"A\" -- \"B\" [weight=2, first_year=1990];"));
    }
}
