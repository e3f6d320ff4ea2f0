//! Median-of-means amplification over independent estimator copies.
//!
//! With theorem parameters each copy has variance at most `3T²`, so the mean
//! of `R = ⌈36/ε²⌉` copies has variance at most `ε²T²/12` and misses `T` by
//! more than `εT` with probability at most `1/12`. The median of
//! `K ≥ 12·ln(1/δ)` such means then fails with probability below `δ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{OptEstimator, PreparedEdge, StreamingEstimator};
use crate::graph::Edge;
use crate::hashing::mix_seed;
use crate::stats::median;

/// Edges buffered from the source before fanning out to the copies.
const BATCH_EDGES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationPlan {
    /// Copies averaged per mean (`R`).
    pub copies_per_mean: usize,
    /// Means the median is taken over (`K`, odd).
    pub means: usize,
    pub eps: f64,
    pub delta: f64,
}

impl ReplicationPlan {
    /// A plan with explicit `R` and `K`; `eps` and `delta` are recorded as NaN.
    pub fn explicit(copies_per_mean: usize, means: usize) -> Result<Self> {
        if copies_per_mean == 0 || means == 0 || means % 2 == 0 {
            return Err(Error::param(format!(
                "need R >= 1 and odd K >= 1, got R={copies_per_mean} K={means}"
            )));
        }
        Ok(ReplicationPlan {
            copies_per_mean,
            means,
            eps: f64::NAN,
            delta: f64::NAN,
        })
    }

    pub fn copies(&self) -> usize {
        self.copies_per_mean * self.means
    }
}

/// `R = ⌈36/ε²⌉` and `K` the smallest odd integer `≥ 12·ln(1/δ)`.
pub fn replication_plan(eps: f64, delta: f64) -> Result<ReplicationPlan> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
    }
    let copies_per_mean = ceil_tolerant(36.0 / (eps * eps)).max(1);
    let mut means = ceil_tolerant(12.0 * (1.0 / delta).ln()).max(1);
    if means % 2 == 0 {
        means += 1;
    }
    Ok(ReplicationPlan {
        copies_per_mean,
        means,
        eps,
        delta,
    })
}

/// Ceiling that ignores floating-point noise just above an integer
/// (`36 / 0.3²` evaluates to `400.00000000000006`).
fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplifiedReport {
    pub estimate: f64,
    pub means: Vec<f64>,
    pub p: f64,
    pub q: f64,
    pub copies_per_mean: usize,
    pub means_count: usize,
    /// Sum of `stored_max` over all copies.
    pub stored_max_total: u64,
    pub edges_seen: u64,
    pub seed: u64,
}

/// Seed of copy `index` under `master_seed`.
pub fn copy_seed(master_seed: u64, index: usize) -> u64 {
    mix_seed(master_seed, index as u64)
}

/// Runs `R·K` copies of the combined estimator over one pass of `edges`.
///
/// Edges are pulled from the source once, in batches, and every batch is
/// fed to every copy. Copies are only kept alive between batches; on the
/// final batch each copy is finished and dropped, so an input that fits in a
/// single batch holds one copy per worker at a time.
pub fn median_of_means<I>(
    edges: I,
    p: f64,
    q: f64,
    plan: &ReplicationPlan,
    master_seed: u64,
) -> Result<AmplifiedReport>
where
    I: IntoIterator<Item = Edge>,
{
    run_batched(edges, p, q, plan, master_seed, BATCH_EDGES)
}

fn run_batched<I>(
    edges: I,
    p: f64,
    q: f64,
    plan: &ReplicationPlan,
    master_seed: u64,
    batch_edges: usize,
) -> Result<AmplifiedReport>
where
    I: IntoIterator<Item = Edge>,
{
    let make = |i: usize| OptEstimator::new(p, q, copy_seed(master_seed, i));
    make(0)?;

    let total = plan.copies();
    let mut source = edges.into_iter().peekable();
    let mut live: Vec<OptEstimator> = Vec::new();
    let mut batch: Vec<PreparedEdge> = Vec::with_capacity(batch_edges);
    loop {
        batch.clear();
        batch.extend(source.by_ref().take(batch_edges).map(PreparedEdge::new));
        if source.peek().is_none() {
            break;
        }
        if live.is_empty() {
            live = (0..total).map(|i| make(i).expect("validated")).collect();
        }
        live.par_iter_mut()
            .for_each(|est| est.process_batch(&batch));
    }

    let reports: Vec<_> = if live.is_empty() {
        // each worker reuses one instance's storage across copies
        (0..total)
            .into_par_iter()
            .map_init(
                || None::<OptEstimator>,
                |scratch, i| {
                    let seed = copy_seed(master_seed, i);
                    let est = match scratch {
                        Some(est) => {
                            est.recycle(seed);
                            est
                        }
                        None => scratch.insert(make(i).expect("validated")),
                    };
                    est.process_batch(&batch);
                    est.finalize()
                },
            )
            .collect()
    } else {
        live.into_par_iter()
            .map(|mut est| {
                est.process_batch(&batch);
                est.finalize()
            })
            .collect()
    };

    let means: Vec<f64> = reports
        .chunks(plan.copies_per_mean)
        .map(|group| group.iter().map(|r| r.estimate).sum::<f64>() / group.len() as f64)
        .collect();
    Ok(AmplifiedReport {
        estimate: median(&means),
        p,
        q,
        copies_per_mean: plan.copies_per_mean,
        means_count: plan.means,
        stored_max_total: reports.iter().map(|r| r.stored_max).sum(),
        edges_seen: reports[0].edges_seen,
        seed: master_seed,
        means,
    })
}
