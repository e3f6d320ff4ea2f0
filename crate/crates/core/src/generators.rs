//! Synthetic graph families with known triangle structure, and stream orders.
//!
//! The book, friendship and disjoint families pin `Δ_E` and `Δ_V` at their
//! extremes: all triangles on one edge, all on one vertex, or none sharing
//! anything. Each can be padded with a triangle-free star on fresh vertices
//! to grow `m` without touching `T`, `Δ_E` or `Δ_V`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeStream, Graph, VertexId};

fn edge(a: VertexId, b: VertexId) -> Edge {
    Edge::new(a, b).expect("generators never emit self-loops")
}

fn build(edges: Vec<Edge>) -> Graph {
    Graph::from_edges(edges).expect("generators never emit duplicate edges")
}

/// Appends a star with `pad` leaves on vertices above every existing id.
fn pad_star(mut edges: Vec<Edge>, pad: u64) -> Vec<Edge> {
    if pad > 0 {
        let hub = edges.iter().map(|e| e.v() + 1).max().unwrap_or(0);
        edges.extend((1..=pad).map(|i| edge(hub, hub + i)));
    }
    edges
}

/// Edge `(0,1)` plus `k` vertices adjacent to both: `k` triangles on one edge.
pub fn gen_book(k: u64, pad: u64) -> Graph {
    let mut edges = vec![edge(0, 1)];
    for w in 2..k + 2 {
        edges.push(edge(0, w));
        edges.push(edge(1, w));
    }
    build(pad_star(edges, pad))
}

/// Center 0 joined to `k` disjoint pairs: `k` triangles on one vertex.
pub fn gen_friendship(k: u64, pad: u64) -> Graph {
    let mut edges = Vec::with_capacity(3 * k as usize);
    for i in 0..k {
        let (a, b) = (2 * i + 1, 2 * i + 2);
        edges.extend([edge(0, a), edge(0, b), edge(a, b)]);
    }
    build(pad_star(edges, pad))
}

/// `t` vertex-disjoint triangles.
pub fn gen_disjoint(t: u64, pad: u64) -> Graph {
    let mut edges = Vec::with_capacity(3 * t as usize);
    for i in 0..t {
        let (a, b, c) = (3 * i, 3 * i + 1, 3 * i + 2);
        edges.extend([edge(a, b), edge(a, c), edge(b, c)]);
    }
    build(pad_star(edges, pad))
}

pub fn gen_complete(n: u64) -> Graph {
    build((0..n).flat_map(|a| (a + 1..n).map(move |b| edge(a, b))).collect())
}

/// Uniform simple graph on vertices `0..n` with exactly `m` edges.
///
/// Vertices that end up isolated do not appear in the result.
pub fn gen_er(n: u64, m: u64, seed: u64) -> Result<Graph> {
    let pairs = n.saturating_mul(n.saturating_sub(1)) / 2;
    if m > pairs {
        return Err(Error::param(format!(
            "cannot place {m} edges on {n} vertices (at most {pairs})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, pairs as usize, m as usize);
    let edges = picks.into_iter().map(|i| pair_at(n, i as u64)).collect();
    Ok(build(edges))
}

/// The `index`-th pair `(a, b)`, `a < b`, in row-major order.
fn pair_at(n: u64, index: u64) -> Edge {
    // row a holds n-1-a pairs and starts at a(2n-a-1)/2
    let start = |a: u64| a * (2 * n - a - 1) / 2;
    let (mut lo, mut hi) = (0, n - 1);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if start(mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    edge(lo, lo + 1 + (index - start(lo)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Complete { n: u64 },
    Book { k: u64 },
    Friendship { k: u64 },
    Disjoint { t: u64 },
    Er { n: u64, m: u64 },
}

/// Analytic `(T, Δ_E, Δ_V)` of a family, before padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct TriangleProfile {
    #[serde(rename = "T")]
    pub triangles: u64,
    #[serde(rename = "delta_E")]
    pub delta_e: u64,
    #[serde(rename = "delta_V")]
    pub delta_v: u64,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Complete { .. } => "complete",
            Family::Book { .. } => "book",
            Family::Friendship { .. } => "friendship",
            Family::Disjoint { .. } => "disjoint",
            Family::Er { .. } => "er",
        }
    }

    /// `None` for random graphs.
    pub fn profile(&self) -> Option<TriangleProfile> {
        let p = |triangles, delta_e, delta_v| {
            Some(TriangleProfile {
                triangles,
                delta_e,
                delta_v,
            })
        };
        match *self {
            Family::Complete { n } => {
                p(n * (n - 1) * (n - 2) / 6, n - 2, (n - 1) * (n - 2) / 2)
            }
            Family::Book { k } => p(k, k, k),
            Family::Friendship { k } => p(k, 1, k),
            Family::Disjoint { t } => p(t, 1, 1),
            Family::Er { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub pad_edges: u64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Graph> {
        let core = match self.family {
            Family::Complete { n } if n < 3 => {
                return Err(Error::param(format!("complete graph needs n >= 3, got {n}")))
            }
            Family::Book { k: 0 } | Family::Friendship { k: 0 } => {
                return Err(Error::param("k must be at least 1"))
            }
            Family::Disjoint { t: 0 } => return Err(Error::param("t must be at least 1")),
            Family::Complete { n } => gen_complete(n),
            Family::Book { k } => return Ok(gen_book(k, self.pad_edges)),
            Family::Friendship { k } => return Ok(gen_friendship(k, self.pad_edges)),
            Family::Disjoint { t } => return Ok(gen_disjoint(t, self.pad_edges)),
            Family::Er { n, m } => gen_er(n, m, self.seed)?,
        };
        Ok(build(pad_star(core.edges().collect(), self.pad_edges)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderPolicy {
    /// Canonical sorted order.
    #[default]
    Given,
    /// Seeded uniform shuffle.
    Random,
    Reverse,
}

impl FromStr for OrderPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "given" => Ok(OrderPolicy::Given),
            "random" => Ok(OrderPolicy::Random),
            "reverse" => Ok(OrderPolicy::Reverse),
            other => Err(Error::param(format!(
                "unknown order {other:?} (expected given, random or reverse)"
            ))),
        }
    }
}

impl fmt::Display for OrderPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderPolicy::Given => "given",
            OrderPolicy::Random => "random",
            OrderPolicy::Reverse => "reverse",
        })
    }
}

pub fn order_stream(g: &Graph, policy: OrderPolicy, seed: u64) -> EdgeStream {
    reorder(g.edges().collect(), policy, seed)
}

/// Reorders an edge sequence; `Given` keeps it as is.
pub fn reorder(mut edges: Vec<Edge>, policy: OrderPolicy, seed: u64) -> EdgeStream {
    match policy {
        OrderPolicy::Given => {}
        OrderPolicy::Reverse => edges.reverse(),
        OrderPolicy::Random => edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
    }
    EdgeStream::new(edges)
}
