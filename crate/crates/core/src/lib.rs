//! One-pass triangle count estimation for insertion-only edge streams.
//!
//! The central estimator ([`estimators::OptEstimator`]) samples vertices with
//! probability `p` through a pairwise independent hash `f` and edges with
//! probability `q` through a four-wise independent hash `g`. An arriving edge
//! is stored when `g` accepts it and at least one endpoint is sampled; before
//! that, every stored wedge it closes whose center is sampled bumps an
//! integer counter `C`. The output `C / (p·q²)` is an unbiased estimate of
//! the triangle count, with variance at most
//! `T/(pq²) + T·Δ_E/(pq) + T·Δ_V/p`.
//!
//! Alongside it live the edge-sampling and colorful baselines, an exact
//! oracle, median-of-means amplification, hard-instance generators and a
//! trial harness.

pub mod amplification;
pub mod error;
pub mod estimators;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod hashing;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{
    exact_triangle_count, graph_stats, load_edge_list, materialize, Edge, EdgeStream, Graph,
    GraphStats, LoadMode, VertexId,
};
