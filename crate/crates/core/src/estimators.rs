//! One-pass triangle estimators behind a common streaming interface.

use rustc_hash::FxHashSet;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{check_probability, Error, Result};
use crate::graph::{exact_triangle_count, Edge, Graph, VertexId};
use crate::hashing::{
    edge_key, mix_seed, ColorHash, EdgeSample, EdgeSampler, KeyPowers, Mersenne61, VertexColoring,
    VertexSample, VertexSampler,
};

/// Sub-seed indices for the vertex and edge hashes.
const VERTEX_STREAM: u64 = 0;
const EDGE_STREAM: u64 = 1;
const COLOR_STREAM: u64 = 2;

/// Final output of one estimator instance.
///
/// For every algorithm `estimate = counter / (p·q²)`: the colorful baseline
/// reports `p = 1, q = 1/k` and edge sampling reports `p = q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub algo: &'static str,
    pub estimate: f64,
    pub counter: u64,
    pub p: f64,
    pub q: f64,
    pub stored_max: u64,
    pub edges_seen: u64,
    pub seed: u64,
}

pub trait StreamingEstimator {
    fn process(&mut self, e: Edge);

    fn finalize(&self) -> EstimateReport;

    fn process_all<I: IntoIterator<Item = Edge>>(&mut self, edges: I)
    where
        Self: Sized,
    {
        for e in edges {
            self.process(e);
        }
    }
}

impl<T: StreamingEstimator + ?Sized> StreamingEstimator for Box<T> {
    fn process(&mut self, e: Edge) {
        (**self).process(e)
    }

    fn finalize(&self) -> EstimateReport {
        (**self).finalize()
    }
}

/// Sorted stored neighbours; most vertices have very few.
type Neighbors = SmallVec<[VertexId; 2]>;

/// Open-addressing map from vertex to arena slot. Entries stamped with an
/// older generation read as empty, so clearing is O(1).
#[derive(Debug, Clone)]
struct VertexIndex {
    slots: Vec<IndexSlot>,
    shift: u32,
    len: usize,
    generation: u32,
}

#[derive(Debug, Clone, Copy, Default)]
struct IndexSlot {
    key: VertexId,
    value: u32,
    generation: u32,
}

impl Default for VertexIndex {
    fn default() -> Self {
        VertexIndex {
            slots: vec![IndexSlot::default(); 64],
            shift: 64 - 6,
            len: 0,
            generation: 1,
        }
    }
}

impl VertexIndex {
    #[inline]
    fn home(&self, x: VertexId) -> usize {
        (x.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> self.shift) as usize
    }

    #[inline]
    fn get(&self, x: VertexId) -> Option<u32> {
        let mask = self.slots.len() - 1;
        let mut i = self.home(x);
        loop {
            let s = &self.slots[i];
            if s.generation != self.generation {
                return None;
            }
            if s.key == x {
                return Some(s.value);
            }
            i = (i + 1) & mask;
        }
    }

    /// The value of `x`, inserting `make()` if absent.
    #[inline]
    fn get_or_insert_with(&mut self, x: VertexId, make: impl FnOnce() -> u32) -> u32 {
        if 2 * (self.len + 1) > self.slots.len() {
            self.grow();
        }
        let mask = self.slots.len() - 1;
        let mut i = self.home(x);
        loop {
            let s = &mut self.slots[i];
            if s.generation != self.generation {
                let value = make();
                *s = IndexSlot {
                    key: x,
                    value,
                    generation: self.generation,
                };
                self.len += 1;
                return value;
            }
            if s.key == x {
                return s.value;
            }
            i = (i + 1) & mask;
        }
    }

    fn grow(&mut self) {
        let live: Vec<IndexSlot> = self.iter_slots().collect();
        self.slots = vec![IndexSlot::default(); self.slots.len() * 2];
        self.shift -= 1;
        self.generation = 1;
        self.len = 0;
        for s in live {
            self.get_or_insert_with(s.key, || s.value);
        }
    }

    fn iter_slots(&self) -> impl Iterator<Item = IndexSlot> + '_ {
        self.slots.iter().copied().filter(move |s| s.generation == self.generation)
    }

    fn clear(&mut self) {
        self.len = 0;
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.slots.fill(IndexSlot::default());
            self.generation = 1;
        }
    }
}

/// Adjacency of the stored edge set: an index into an arena of lists. The
/// arena keeps its lists, and their allocations, across [`clear`].
///
/// [`clear`]: StoredAdjacency::clear
#[derive(Debug, Clone, Default)]
struct StoredAdjacency {
    index: VertexIndex,
    lists: Vec<Neighbors>,
    used: usize,
}

impl StoredAdjacency {
    #[inline]
    fn get(&self, x: VertexId) -> Option<&Neighbors> {
        self.index.get(x).map(|i| &self.lists[i as usize])
    }

    /// Adds `to` to the list of `from`; false if it was already there.
    #[inline]
    fn insert_half(&mut self, from: VertexId, to: VertexId) -> bool {
        let (lists, used) = (&mut self.lists, &mut self.used);
        let slot = self.index.get_or_insert_with(from, || {
            if *used < lists.len() {
                lists[*used].clear();
            } else {
                lists.push(Neighbors::new());
            }
            *used += 1;
            (*used - 1) as u32
        });
        let nbrs = &mut self.lists[slot as usize];
        if nbrs.last().is_none_or(|&last| last < to) {
            nbrs.push(to);
            return true;
        }
        match nbrs.binary_search(&to) {
            Ok(_) => false,
            Err(pos) => {
                nbrs.insert(pos, to);
                true
            }
        }
    }

    fn iter(&self) -> impl Iterator<Item = (VertexId, &Neighbors)> + '_ {
        self.index.iter_slots().map(|s| (s.key, &self.lists[s.value as usize]))
    }

    fn clear(&mut self) {
        self.index.clear();
        self.used = 0;
    }
}

const OCCUPANCY_BITS: u32 = 16;

/// One-sided filter over vertices that have a stored neighbour. A clear bit
/// proves the vertex is absent, which skips the map probe for most edges.
#[derive(Debug, Clone)]
struct Occupancy(Box<[u64]>);

impl Occupancy {
    fn new() -> Self {
        Occupancy(vec![0; 1 << (OCCUPANCY_BITS - 6)].into_boxed_slice())
    }

    #[inline]
    fn slot(v: VertexId) -> u16 {
        (v.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> (64 - OCCUPANCY_BITS)) as u16
    }

    #[inline]
    fn insert(&mut self, slot: u16) {
        self.0[slot as usize >> 6] |= 1 << (slot & 63);
    }

    #[inline]
    fn may_contain(&self, slot: u16) -> bool {
        self.0[slot as usize >> 6] & 1 << (slot & 63) != 0
    }

    fn clear(&mut self) {
        self.0.fill(0);
    }
}

/// An edge with the copy-independent parts of its processing done once, for
/// feeding many [`OptEstimator`] copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreparedEdge {
    edge: Edge,
    powers: KeyPowers,
    slot_u: u16,
    slot_v: u16,
}

impl PreparedEdge {
    #[inline]
    pub fn new(edge: Edge) -> Self {
        PreparedEdge {
            edge,
            powers: KeyPowers::new(edge_key(&Mersenne61, edge)),
            slot_u: Occupancy::slot(edge.u()),
            slot_v: Occupancy::slot(edge.v()),
        }
    }

    pub fn edge(&self) -> Edge {
        self.edge
    }
}

/// The combined vertex/edge sampling estimator.
///
/// Stored edges form the set `S`, kept as sorted adjacency lists. When an
/// edge `wv` arrives, every common stored neighbour `u` of `w` and `v` with
/// `f(u) = 1` closes a sampled wedge and increments the counter. Only then is
/// `wv` considered for insertion, which needs `g(wv) = 1` and a sampled
/// endpoint.
#[derive(Debug, Clone)]
pub struct OptEstimator<F = VertexSampler, G = EdgeSampler> {
    f: F,
    g: G,
    seed: u64,
    stored: StoredAdjacency,
    occupied: Occupancy,
    counter: u64,
    stored_now: u64,
    stored_max: u64,
    edges_seen: u64,
    name: &'static str,
}

impl OptEstimator {
    pub fn new(p: f64, q: f64, seed: u64) -> Result<Self> {
        let f = VertexSampler::new(mix_seed(seed, VERTEX_STREAM), p)?;
        let g = EdgeSampler::new(mix_seed(seed, EDGE_STREAM), q)?;
        Ok(OptEstimator::with_samplers(f, g, seed))
    }

    /// Resets to a fresh instance with the same `p`, `q` and a new seed,
    /// keeping allocated storage.
    pub fn recycle(&mut self, seed: u64) {
        let (p, q) = (self.f.p(), self.g.q());
        self.f = VertexSampler::new(mix_seed(seed, VERTEX_STREAM), p).expect("p was valid");
        self.g = EdgeSampler::new(mix_seed(seed, EDGE_STREAM), q).expect("q was valid");
        self.seed = seed;
        self.stored.clear();
        self.occupied.clear();
        self.counter = 0;
        self.stored_now = 0;
        self.stored_max = 0;
        self.edges_seen = 0;
    }

    /// Equivalent to [`StreamingEstimator::process`] on `pe.edge()`.
    #[inline]
    pub fn process_prepared(&mut self, pe: &PreparedEdge) {
        self.step(pe.edge, pe.slot_u, pe.slot_v, |g| g.sample_powers(&pe.powers));
    }

    /// Processes a batch of prepared edges in order.
    pub fn process_batch(&mut self, batch: &[PreparedEdge]) {
        for pe in batch {
            self.process_prepared(pe);
        }
    }
}

/// Edge sampling with the wedge closing edge kept for free: `p = 1`.
pub fn wedge_sampling(q: f64, seed: u64) -> Result<OptEstimator> {
    let mut est = OptEstimator::new(1.0, q, seed)?;
    est.name = "wedge";
    Ok(est)
}

/// Vertex sampling storing every edge incident to a sampled vertex: `q = 1`.
pub fn vertex_sampling(p: f64, seed: u64) -> Result<OptEstimator> {
    let mut est = OptEstimator::new(p, 1.0, seed)?;
    est.name = "vertex";
    Ok(est)
}

impl<F: VertexSample, G> OptEstimator<F, G> {
    pub fn with_samplers(f: F, g: G, seed: u64) -> Self {
        OptEstimator {
            f,
            g,
            seed,
            stored: StoredAdjacency::default(),
            occupied: Occupancy::new(),
            counter: 0,
            stored_now: 0,
            stored_max: 0,
            edges_seen: 0,
            name: "opt",
        }
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn stored_now(&self) -> u64 {
        self.stored_now
    }

    pub fn stored_max(&self) -> u64 {
        self.stored_max
    }

    pub fn is_stored(&self, e: Edge) -> bool {
        self.stored
            .get(e.u())
            .is_some_and(|n| n.binary_search(&e.v()).is_ok())
    }

    /// Stored edges in canonical order.
    pub fn stored_edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .stored
            .iter()
            .flat_map(|(u, nbrs)| {
                nbrs.iter()
                    .filter(move |&&v| u < v)
                    .map(move |&v| Edge::new(u, v).expect("no self-loops in S"))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Sampled wedges `w–u–v` closed by `wv`; callers check occupancy first.
    #[inline(never)]
    fn closed_wedges(&self, w: VertexId, v: VertexId) -> u64 {
        let Some(b) = self.stored.get(v) else {
            return 0;
        };
        let Some(a) = self.stored.get(w) else {
            return 0;
        };
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        small
            .iter()
            .filter(|&&u| large.binary_search(&u).is_ok() && self.f.sample_vertex(u))
            .count() as u64
    }
}

impl<F: VertexSample, G> OptEstimator<F, G> {
    #[inline]
    fn step(&mut self, e: Edge, slot_w: u16, slot_v: u16, edge_coin: impl FnOnce(&G) -> bool) {
        let (w, v) = e.endpoints();
        self.edges_seen += 1;
        if self.occupied.may_contain(slot_v) && self.occupied.may_contain(slot_w) {
            self.counter += self.closed_wedges(w, v);
        }

        if (self.f.sample_vertex(w) || self.f.sample_vertex(v)) && edge_coin(&self.g) {
            // a repeated edge is already present and must not be counted twice
            if self.stored.insert_half(w, v) {
                self.stored.insert_half(v, w);
                self.occupied.insert(slot_w);
                self.occupied.insert(slot_v);
                self.stored_now += 1;
                self.stored_max = self.stored_max.max(self.stored_now);
            }
        }
    }
}

impl<F: VertexSample, G: EdgeSample> StreamingEstimator for OptEstimator<F, G> {
    #[inline]
    fn process(&mut self, e: Edge) {
        let (slot_w, slot_v) = (Occupancy::slot(e.u()), Occupancy::slot(e.v()));
        self.step(e, slot_w, slot_v, |g| g.sample_edge(e));
    }

    fn finalize(&self) -> EstimateReport {
        let (p, q) = (self.f.p(), self.g.q());
        EstimateReport {
            algo: self.name,
            estimate: self.counter as f64 / (p * q * q),
            counter: self.counter,
            p,
            q,
            stored_max: self.stored_max,
            edges_seen: self.edges_seen,
            seed: self.seed,
        }
    }
}

/// Keeps each edge with probability `q`, counts retained triangles at the
/// end and scales by `q^-3`.
#[derive(Debug, Clone)]
pub struct EdgeSamplingEstimator<G = EdgeSampler> {
    g: G,
    seed: u64,
    kept: FxHashSet<Edge>,
    edges_seen: u64,
}

impl EdgeSamplingEstimator {
    pub fn new(q: f64, seed: u64) -> Result<Self> {
        let g = EdgeSampler::new(mix_seed(seed, EDGE_STREAM), q)?;
        Ok(EdgeSamplingEstimator::with_sampler(g, seed))
    }
}

impl<G: EdgeSample> EdgeSamplingEstimator<G> {
    pub fn with_sampler(g: G, seed: u64) -> Self {
        EdgeSamplingEstimator {
            g,
            seed,
            kept: FxHashSet::default(),
            edges_seen: 0,
        }
    }
}

fn retained_triangles(kept: &FxHashSet<Edge>) -> u64 {
    let g = Graph::from_edges(kept.iter().copied()).expect("set holds distinct edges");
    exact_triangle_count(&g)
}

impl<G: EdgeSample> StreamingEstimator for EdgeSamplingEstimator<G> {
    fn process(&mut self, e: Edge) {
        self.edges_seen += 1;
        if self.g.sample_edge(e) {
            self.kept.insert(e);
        }
    }

    fn finalize(&self) -> EstimateReport {
        let q = self.g.q();
        let counter = retained_triangles(&self.kept);
        EstimateReport {
            algo: "tkmf",
            estimate: counter as f64 / (q * q * q),
            counter,
            p: q,
            q,
            // retention is final, so the set only grows
            stored_max: self.kept.len() as u64,
            edges_seen: self.edges_seen,
            seed: self.seed,
        }
    }
}

/// Colors vertices into `k` classes, keeps monochromatic edges and scales the
/// retained triangle count by `k²`.
#[derive(Debug, Clone)]
pub struct ColorfulEstimator<C = ColorHash> {
    coloring: C,
    seed: u64,
    kept: FxHashSet<Edge>,
    edges_seen: u64,
}

impl ColorfulEstimator {
    pub fn new(k: u64, seed: u64) -> Result<Self> {
        let c = ColorHash::new(mix_seed(seed, COLOR_STREAM), k)?;
        Ok(ColorfulEstimator::with_coloring(c, seed))
    }
}

impl<C: VertexColoring> ColorfulEstimator<C> {
    pub fn with_coloring(coloring: C, seed: u64) -> Self {
        ColorfulEstimator {
            coloring,
            seed,
            kept: FxHashSet::default(),
            edges_seen: 0,
        }
    }
}

impl<C: VertexColoring> StreamingEstimator for ColorfulEstimator<C> {
    fn process(&mut self, e: Edge) {
        self.edges_seen += 1;
        if self.coloring.color(e.u()) == self.coloring.color(e.v()) {
            self.kept.insert(e);
        }
    }

    fn finalize(&self) -> EstimateReport {
        let k = self.coloring.colors();
        let counter = retained_triangles(&self.kept);
        EstimateReport {
            algo: "colorful",
            estimate: (counter as f64) * (k as f64) * (k as f64),
            counter,
            p: 1.0,
            q: 1.0 / k as f64,
            stored_max: self.kept.len() as u64,
            edges_seen: self.edges_seen,
            seed: self.seed,
        }
    }
}

/// An estimator configuration, buildable for any seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Opt { p: f64, q: f64 },
    Wedge { q: f64 },
    Vertex { p: f64 },
    Tkmf { q: f64 },
    Colorful { k: u64 },
}

pub type BoxedEstimator = Box<dyn StreamingEstimator + Send>;

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Opt { .. } => "opt",
            Algorithm::Wedge { .. } => "wedge",
            Algorithm::Vertex { .. } => "vertex",
            Algorithm::Tkmf { .. } => "tkmf",
            Algorithm::Colorful { .. } => "colorful",
        }
    }

    /// Checks parameters without building anything.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Algorithm::Opt { p, q } => check_probability("p", p).and(check_probability("q", q)),
            Algorithm::Wedge { q } | Algorithm::Tkmf { q } => check_probability("q", q),
            Algorithm::Vertex { p } => check_probability("p", p),
            Algorithm::Colorful { k: 0 } => Err(Error::param("k must be at least 1")),
            Algorithm::Colorful { .. } => Ok(()),
        }
    }

    /// `(p, q)` as they appear in the report.
    pub fn report_probabilities(&self) -> (f64, f64) {
        match *self {
            Algorithm::Opt { p, q } => (p, q),
            Algorithm::Wedge { q } => (1.0, q),
            Algorithm::Vertex { p } => (p, 1.0),
            Algorithm::Tkmf { q } => (q, q),
            Algorithm::Colorful { k } => (1.0, 1.0 / k as f64),
        }
    }

    /// Whether the combined-sampling variance bound applies.
    pub fn is_opt_family(&self) -> bool {
        matches!(self, Algorithm::Opt { .. } | Algorithm::Wedge { .. } | Algorithm::Vertex { .. })
    }

    pub fn build(&self, seed: u64) -> Result<BoxedEstimator> {
        Ok(match *self {
            Algorithm::Opt { p, q } => Box::new(OptEstimator::new(p, q, seed)?),
            Algorithm::Wedge { q } => Box::new(wedge_sampling(q, seed)?),
            Algorithm::Vertex { p } => Box::new(vertex_sampling(p, seed)?),
            Algorithm::Tkmf { q } => Box::new(EdgeSamplingEstimator::new(q, seed)?),
            Algorithm::Colorful { k } => Box::new(ColorfulEstimator::new(k, seed)?),
        })
    }
}

/// Runs a fresh instance of `algo` over `edges`.
pub fn run_once<I: IntoIterator<Item = Edge>>(algo: &Algorithm, seed: u64, edges: I) -> Result<EstimateReport> {
    let mut est = algo.build(seed)?;
    for e in edges {
        est.process(e);
    }
    Ok(est.finalize())
}

/// Sampling probabilities chosen from a lower bound on `T` and upper bounds
/// on `Δ_E` and `Δ_V`: `p = Δ_V/T`, `q = max(Δ_E/Δ_V, 1/√Δ_V)`, both
/// clamped to 1.
pub fn select_params(t_lower: u64, delta_e_upper: u64, delta_v_upper: u64) -> Result<(f64, f64)> {
    if t_lower == 0 || delta_v_upper == 0 {
        return Err(Error::param(
            "T lower bound and delta_V upper bound must be at least 1",
        ));
    }
    let dv = delta_v_upper as f64;
    let p = (dv / t_lower as f64).min(1.0);
    let q = (delta_e_upper as f64 / dv).max(1.0 / dv.sqrt()).min(1.0);
    Ok((p, q))
}

/// Checks `Δ_E ≤ Δ_V ≤ T` on caller-supplied bounds.
pub fn check_bounds(t_lower: u64, delta_e_upper: u64, delta_v_upper: u64) -> Result<()> {
    if delta_e_upper > delta_v_upper {
        return Err(Error::param(format!(
            "delta_E upper bound {delta_e_upper} exceeds delta_V upper bound {delta_v_upper} (need de-upper <= dv-upper)"
        )));
    }
    if delta_v_upper > t_lower {
        return Err(Error::param(format!(
            "delta_V upper bound {delta_v_upper} exceeds T lower bound {t_lower} (need dv-upper <= t-lower)"
        )));
    }
    Ok(())
}

/// `T/(pq²) + T·Δ_E/(pq) + T·Δ_V/p`.
pub fn variance_bound(t: u64, delta_e: u64, delta_v: u64, p: f64, q: f64) -> f64 {
    let t = t as f64;
    t / (p * q * q) + t * delta_e as f64 / (p * q) + t * delta_v as f64 / p
}
