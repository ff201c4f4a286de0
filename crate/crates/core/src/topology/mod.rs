//! Communication topologies: finite undirected graphs without self-loops,
//! the standard families (lines, stars, cliques, trees) and parsing of
//! topology literals and adjacency-list files.

pub mod lift;
pub mod unfold;

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Index of a vertex in its topology's vertex order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("self-loop on vertex `{0}`")]
    SelfLoop(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("malformed topology literal `{0}`: {1}")]
    BadLiteral(String, String),
    #[error("tree vertex set is not prefix closed: missing parent of `{0}`")]
    NotPrefixClosed(String),
    #[error("adjacency file line {0}: {1}")]
    BadEdgeLine(usize, String),
}

/// Finite undirected graph. Neighbor lists are kept sorted so every
/// iteration over the topology is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    vertices: Vec<String>,
    neighbors: Vec<Vec<VertexId>>,
}

impl Topology {
    /// Builds a topology from named vertices and undirected edges given as
    /// index pairs. Symmetry is enforced by construction.
    pub fn new(
        vertices: Vec<String>,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Topology, TopologyError> {
        {
            let mut seen = BTreeSet::new();
            for v in &vertices {
                if !seen.insert(v.clone()) {
                    return Err(TopologyError::DuplicateVertex(v.clone()));
                }
            }
        }
        let n = vertices.len();
        let mut sets: Vec<BTreeSet<VertexId>> = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            if a == b {
                return Err(TopologyError::SelfLoop(vertices[a as usize].clone()));
            }
            assert!((a as usize) < n && (b as usize) < n, "edge endpoint in range");
            sets[a as usize].insert(VertexId(b));
            sets[b as usize].insert(VertexId(a));
        }
        Ok(Topology {
            vertices,
            neighbors: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.idx()]
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .map(|i| VertexId(i as u32))
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[v.idx()]
    }

    pub fn are_neighbors(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors[u.idx()].binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Undirected edges with endpoints in vertex order, each listed once.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for v in self.vertices() {
            for &u in self.neighbors(v) {
                if v < u {
                    out.push((v, u));
                }
            }
        }
        out
    }
}

/// Line with n vertices v1 - v2 - ... - vn.
pub fn make_line(n: usize) -> Topology {
    assert!(n >= 1);
    let vertices = (1..=n).map(|i| format!("v{i}")).collect();
    let edges = (0..n.saturating_sub(1)).map(|i| (i as u32, i as u32 + 1));
    Topology::new(vertices, edges).expect("line is well-formed")
}

/// Clique over n vertices v1..vn.
pub fn make_clique(n: usize) -> Topology {
    assert!(n >= 1);
    let vertices = (1..=n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            edges.push((i, j));
        }
    }
    Topology::new(vertices, edges).expect("clique is well-formed")
}

/// Tree topology: vertices are words over the naturals, prefix closed, with
/// the empty word as root, and each non-root vertex connected exactly to
/// its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTopology {
    topology: Topology,
    words: Vec<Vec<u32>>,
}

impl TreeTopology {
    /// Builds a tree from its words. The set must contain the empty word
    /// and be prefix closed; words are sorted (by length, then
    /// lexicographically) to fix the vertex order.
    pub fn new(mut words: Vec<Vec<u32>>) -> Result<TreeTopology, TopologyError> {
        words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        words.dedup();
        if words.first().map(|w| !w.is_empty()).unwrap_or(true) {
            return Err(TopologyError::NotPrefixClosed("ε".into()));
        }
        let index: std::collections::HashMap<&[u32], u32> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_slice(), i as u32))
            .collect();
        let mut edges = Vec::new();
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() {
                continue;
            }
            let parent = &w[..w.len() - 1];
            match index.get(parent) {
                Some(&pi) => edges.push((pi, i as u32)),
                None => return Err(TopologyError::NotPrefixClosed(render_word(w))),
            }
        }
        let vertices = words.iter().map(|w| render_word(w)).collect();
        Ok(TreeTopology {
            topology: Topology::new(vertices, edges)?,
            words,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn root(&self) -> VertexId {
        VertexId(0)
    }

    pub fn word(&self, v: VertexId) -> &[u32] {
        &self.words[v.idx()]
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.words[v.idx()].len()
    }

    pub fn height(&self) -> usize {
        self.words.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        let w = self.word(v);
        if w.is_empty() {
            return None;
        }
        let parent = &w[..w.len() - 1];
        self.words
            .iter()
            .position(|x| x == parent)
            .map(|i| VertexId(i as u32))
    }
}

/// Star: root ε with `leaves` children 1..leaves (a tree of height 1).
pub fn make_star(leaves: usize) -> TreeTopology {
    let mut words = vec![Vec::new()];
    for i in 1..=leaves as u32 {
        words.push(vec![i]);
    }
    TreeTopology::new(words).expect("star is well-formed")
}

/// Tree from an explicit word set, e.g. the contents of `tree:{ε,1,2,11}`.
pub fn make_tree(words: Vec<Vec<u32>>) -> Result<TreeTopology, TopologyError> {
    TreeTopology::new(words)
}

/// Renders a tree word: ε for the root, dot-separated indices otherwise.
pub fn render_word(w: &[u32]) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

fn parse_word(s: &str) -> Option<Vec<u32>> {
    if s == "ε" || s == "e" || s.is_empty() {
        return Some(Vec::new());
    }
    if s.contains('.') {
        s.split('.').map(|p| p.parse().ok()).collect()
    } else {
        // compact digit form: every character one index
        s.chars().map(|c| c.to_digit(10)).collect()
    }
}

/// Parses a topology literal: `line:N`, `star:N`, `clique:N` or
/// `tree:{ε,1,2,11,...}` (tree words either compact digit strings or
/// dot-separated indices).
pub fn parse_topology(spec: &str) -> Result<Topology, TopologyError> {
    let bad = |msg: &str| TopologyError::BadLiteral(spec.to_string(), msg.to_string());
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| bad("expected `<kind>:<arg>`"))?;
    match kind {
        "line" | "clique" => {
            let n: usize = arg.parse().map_err(|_| bad("expected a number"))?;
            if n < 1 {
                return Err(bad("need at least one vertex"));
            }
            Ok(if kind == "line" {
                make_line(n)
            } else {
                make_clique(n)
            })
        }
        "star" => {
            let n: usize = arg.parse().map_err(|_| bad("expected a number"))?;
            Ok(make_star(n).topology().clone())
        }
        "tree" => {
            let inner = arg
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or_else(|| bad("expected `tree:{...}`"))?;
            let mut words = Vec::new();
            for part in inner.split(',') {
                words.push(parse_word(part.trim()).ok_or_else(|| bad("bad tree word"))?);
            }
            Ok(make_tree(words)?.topology().clone())
        }
        _ => Err(bad("unknown topology kind")),
    }
}

/// Parses an adjacency-list file: one `edge u v` per line, with optional
/// `vertex v` lines for isolated vertices and `#` comments. Trace and
/// verdict lines are skipped so a combined report parses as a topology.
pub fn parse_edge_file(text: &str) -> Result<Topology, TopologyError> {
    let mut names: Vec<String> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let id = |names: &mut Vec<String>, n: &str| -> u32 {
        match names.iter().position(|x| x == n) {
            Some(i) => i as u32,
            None => {
                names.push(n.to_string());
                (names.len() - 1) as u32
            }
        }
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks.as_slice() {
            ["edge", u, v] => {
                let ui = id(&mut names, u);
                let vi = id(&mut names, v);
                edges.push((ui, vi));
            }
            ["vertex", v] => {
                id(&mut names, v);
            }
            [first, ..]
                if matches!(
                    *first,
                    "step" | "init" | "COVERABLE" | "NOT_COVERABLE" | "UNKNOWN"
                ) || first.starts_with("pair=")
                    || first.starts_with("print=") => {}
            _ => {
                return Err(TopologyError::BadEdgeLine(
                    lineno + 1,
                    "expected `edge <u> <v>` or `vertex <v>`".into(),
                ))
            }
        }
    }
    Topology::new(names, edges)
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.vertices() {
            writeln!(f, "vertex {}", self.vertex_name(v))?;
        }
        for (u, v) in self.edges() {
            writeln!(f, "edge {} {}", self.vertex_name(u), self.vertex_name(v))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_three() {
        let t = make_line(3);
        assert_eq!(t.num_vertices(), 3);
        assert_eq!(
            t.edges(),
            vec![(VertexId(0), VertexId(1)), (VertexId(1), VertexId(2))]
        );
    }

    #[test]
    fn clique_three_has_three_edges() {
        let t = make_clique(3);
        assert_eq!(t.edges().len(), 3);
        for v in t.vertices() {
            assert_eq!(t.neighbors(v).len(), 2);
        }
    }

    #[test]
    fn star_four() {
        let s = make_star(4);
        let t = s.topology();
        assert_eq!(t.num_vertices(), 5);
        assert_eq!(t.neighbors(s.root()).len(), 4);
        assert_eq!(s.height(), 1);
    }

    #[test]
    fn symmetry_and_irreflexivity() {
        for t in [make_line(4), make_clique(4), make_star(3).topology().clone()] {
            for v in t.vertices() {
                assert!(!t.are_neighbors(v, v));
                for &u in t.neighbors(v) {
                    assert!(t.are_neighbors(u, v));
                }
            }
        }
    }

    #[test]
    fn tree_literal_round_trip() {
        let t = parse_topology("tree:{ε,1,2,11}").unwrap();
        assert_eq!(t.num_vertices(), 4);
        assert!(t.are_neighbors(t.vertex_id("ε").unwrap(), t.vertex_id("1").unwrap()));
        assert!(t.are_neighbors(t.vertex_id("1").unwrap(), t.vertex_id("1.1").unwrap()));
        assert!(!t.are_neighbors(t.vertex_id("1").unwrap(), t.vertex_id("2").unwrap()));
    }

    #[test]
    fn tree_requires_prefix_closure() {
        assert!(matches!(
            make_tree(vec![vec![], vec![1, 1]]),
            Err(TopologyError::NotPrefixClosed(_))
        ));
    }

    #[test]
    fn literal_errors() {
        assert!(parse_topology("ring:3").is_err());
        assert!(parse_topology("line:0").is_err());
        assert!(parse_topology("line:x").is_err());
        assert!(parse_topology("tree:1,2").is_err());
    }

    #[test]
    fn edge_file_round_trip() {
        let t = make_clique(3);
        let text = t.to_string();
        let u = parse_edge_file(&text).unwrap();
        assert_eq!(t, u);
    }
}
