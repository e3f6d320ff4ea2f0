//! Simple undirected graphs, edge-list ingestion and the exact triangle oracle.
//!
//! The oracle counts, for every edge `(u, v)`, the common neighbours
//! `|adj(u) ∩ adj(v)|`. Summing over edges counts every triangle three times;
//! the per-edge counts give `delta_E` directly and accumulating them onto both
//! endpoints counts each triangle at a vertex twice, which gives `delta_V`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = u64;

/// An undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    u: VertexId,
    v: VertexId,
}

impl Edge {
    /// Builds the canonical form of `{a, b}`. Fails on a self-loop.
    pub fn new(a: VertexId, b: VertexId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge { u: a, v: b }),
            std::cmp::Ordering::Greater => Ok(Edge { u: b, v: a }),
            std::cmp::Ordering::Equal => Err(Error::SelfLoop { vertex: a, line: None }),
        }
    }

    /// Smaller endpoint.
    #[inline]
    pub fn u(&self) -> VertexId {
        self.u
    }

    /// Larger endpoint.
    #[inline]
    pub fn v(&self) -> VertexId {
        self.v
    }

    #[inline]
    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.u, self.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.u, self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Reject self-loops and repeated edges.
    #[default]
    Strict,
    /// Drop self-loops and repeated edges, counting them.
    Permissive,
}

/// An ordered sequence of edges, the only input an estimator sees.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeStream {
    edges: Vec<Edge>,
    /// Lines dropped in permissive mode.
    dropped: usize,
}

impl EdgeStream {
    pub fn new(edges: Vec<Edge>) -> Self {
        EdgeStream { edges, dropped: 0 }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of self-loops and duplicates removed by a permissive load.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn iter(&self) -> std::iter::Copied<std::slice::Iter<'_, Edge>> {
        self.edges.iter().copied()
    }

    /// Serializes to the edge-list text format, one `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 12);
        for e in &self.edges {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromIterator<Edge> for EdgeStream {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        EdgeStream::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a EdgeStream {
    type Item = Edge;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, Edge>>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

fn parse_vertex(tok: &str, line: usize) -> Result<VertexId> {
    tok.parse::<VertexId>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid vertex id {tok:?}"),
    })
}

/// Parses the whitespace-separated edge-list format.
///
/// Lines starting with `#` and blank lines are skipped; CRLF endings are
/// accepted. Line numbers in errors are 1-based.
pub fn load_edge_list(text: &[u8], mode: LoadMode) -> Result<EdgeStream> {
    let text = std::str::from_utf8(text).map_err(|e| {
        let line = 1 + text[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
        Error::Parse {
            line,
            message: "invalid UTF-8".into(),
        }
    })?;

    let mut seen = rustc_hash::FxHashSet::default();
    let mut edges = Vec::new();
    let mut dropped = 0;
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (a, b) = match (toks.next(), toks.next(), toks.next()) {
            (Some(a), Some(b), None) => (parse_vertex(a, line_no)?, parse_vertex(b, line_no)?),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected two vertex ids, got {line:?}"),
                })
            }
        };
        let edge = match Edge::new(a, b) {
            Ok(e) => e,
            Err(_) if mode == LoadMode::Permissive => {
                dropped += 1;
                continue;
            }
            Err(_) => {
                return Err(Error::SelfLoop {
                    vertex: a,
                    line: Some(line_no),
                })
            }
        };
        if !seen.insert(edge) {
            if mode == LoadMode::Permissive {
                dropped += 1;
                continue;
            }
            return Err(Error::DuplicateEdge {
                u: edge.u,
                v: edge.v,
                line: Some(line_no),
            });
        }
        edges.push(edge);
    }
    Ok(EdgeStream { edges, dropped })
}

/// A simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    adj: BTreeMap<VertexId, Vec<VertexId>>,
    m: usize,
}

impl Graph {
    pub fn from_edges<I: IntoIterator<Item = Edge>>(edges: I) -> Result<Self> {
        let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        let mut m = 0;
        for e in edges {
            adj.entry(e.u).or_default().push(e.v);
            adj.entry(e.v).or_default().push(e.u);
            m += 1;
        }
        for (&x, nbrs) in adj.iter_mut() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                let (u, v) = if x < w[0] { (x, w[0]) } else { (w[0], x) };
                return Err(Error::DuplicateEdge { u, v, line: None });
            }
        }
        Ok(Graph { adj, m })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    /// Sorted neighbours of `x`; empty when `x` is not an endpoint.
    pub fn neighbors(&self, x: VertexId) -> &[VertexId] {
        self.adj.get(&x).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, x: VertexId) -> usize {
        self.neighbors(x).len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Edges in canonical sorted order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj.iter().flat_map(|(&u, nbrs)| {
            let start = nbrs.partition_point(|&w| w <= u);
            nbrs[start..].iter().map(move |&v| Edge { u, v })
        })
    }

    pub fn to_stream(&self) -> EdgeStream {
        self.edges().collect()
    }
}

/// Builds the graph of a stream, rejecting repeated edges.
pub fn materialize(stream: &EdgeStream) -> Result<Graph> {
    Graph::from_edges(stream.iter())
}

fn common_neighbors(a: &[VertexId], b: &[VertexId]) -> u64 {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Exact number of triangles.
pub fn exact_triangle_count(g: &Graph) -> u64 {
    g.edges()
        .map(|e| common_neighbors(g.neighbors(e.u), g.neighbors(e.v)))
        .sum::<u64>()
        / 3
}

/// Exact graph parameters: size, triangles, and their maximum sharing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub n: u64,
    pub m: u64,
    #[serde(rename = "T")]
    pub triangles: u64,
    /// Maximum number of triangles sharing one edge.
    #[serde(rename = "delta_E")]
    pub delta_e: u64,
    /// Maximum number of triangles sharing one vertex.
    #[serde(rename = "delta_V")]
    pub delta_v: u64,
    /// Maximum degree.
    pub d: u64,
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    let mut per_vertex: BTreeMap<VertexId, u64> = BTreeMap::new();
    let mut sum = 0u64;
    let mut delta_e = 0u64;
    for e in g.edges() {
        let c = common_neighbors(g.neighbors(e.u), g.neighbors(e.v));
        if c == 0 {
            continue;
        }
        sum += c;
        delta_e = delta_e.max(c);
        *per_vertex.entry(e.u).or_default() += c;
        *per_vertex.entry(e.v).or_default() += c;
    }
    // each triangle at x is seen from both of its edges incident to x
    let delta_v = per_vertex.values().map(|&c| c / 2).max().unwrap_or(0);
    GraphStats {
        n: g.n() as u64,
        m: g.m() as u64,
        triangles: sum / 3,
        delta_e,
        delta_v,
        d: g.max_degree() as u64,
    }
}
