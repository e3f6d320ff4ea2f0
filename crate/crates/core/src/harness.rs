//! Repeated independent trials over one stream, with CSV records and
//! per-algorithm summaries.
//!
//! Trials run in parallel but are collected in index order, and timing is
//! opt-in, so a fixed configuration always produces the same bytes.

use std::io;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{variance_bound, Algorithm};
use crate::graph::{Edge, GraphStats};
use crate::hashing::mix_seed;
use crate::stats::Summary;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub algo: &'static str,
    pub trial: u64,
    pub seed: u64,
    pub p: f64,
    pub q: f64,
    pub estimate: f64,
    #[serde(rename = "exact_T")]
    pub exact_t: Option<u64>,
    pub rel_error: Option<f64>,
    pub stored_max: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub algos: Vec<Algorithm>,
    pub trials: u64,
    pub master_seed: u64,
    /// Record wall-clock time per trial; otherwise `elapsed_ms` is 0.
    pub timing: bool,
}

/// Seed of trial `index`; shared by every algorithm in the run.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    mix_seed(master_seed, index)
}

/// Runs every algorithm `trials` times. Records are grouped by algorithm in
/// configuration order, then by trial index.
pub fn run_bench(edges: &[Edge], exact_t: Option<u64>, config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if config.trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    for algo in &config.algos {
        algo.validate()?;
    }
    let mut records = Vec::with_capacity(config.algos.len() * config.trials as usize);
    for algo in &config.algos {
        let batch: Result<Vec<_>> = (0..config.trials)
            .into_par_iter()
            .map(|trial| run_trial(algo, edges, exact_t, config, trial))
            .collect();
        records.extend(batch?);
    }
    Ok(records)
}

fn run_trial(
    algo: &Algorithm,
    edges: &[Edge],
    exact_t: Option<u64>,
    config: &BenchConfig,
    trial: u64,
) -> Result<BenchRecord> {
    let seed = trial_seed(config.master_seed, trial);
    let start = config.timing.then(Instant::now);
    let mut est = algo.build(seed)?;
    for &e in edges {
        est.process(e);
    }
    let report = est.finalize();
    let elapsed_ms = start.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3);
    let rel_error = exact_t
        .filter(|&t| t > 0)
        .map(|t| (report.estimate - t as f64).abs() / t as f64);
    Ok(BenchRecord {
        algo: report.algo,
        trial,
        seed,
        p: report.p,
        q: report.q,
        estimate: report.estimate,
        exact_t,
        rel_error,
        stored_max: report.stored_max,
        elapsed_ms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgoSummary {
    pub algo: &'static str,
    pub trials: u64,
    pub mean: f64,
    pub variance: f64,
    pub mean_stored_max: f64,
    /// Analytic variance bound, for the combined estimator and its special
    /// cases when exact statistics are known.
    pub variance_bound: Option<f64>,
}

pub fn summarize(records: &[BenchRecord], algos: &[Algorithm], stats: Option<&GraphStats>) -> Vec<AlgoSummary> {
    algos
        .iter()
        .map(|algo| {
            let rows: Vec<&BenchRecord> = records.iter().filter(|r| r.algo == algo.name()).collect();
            let estimates: Vec<f64> = rows.iter().map(|r| r.estimate).collect();
            let summary = Summary::of(&estimates);
            let (p, q) = algo.report_probabilities();
            let bound = stats
                .filter(|_| algo.is_opt_family())
                .map(|s| variance_bound(s.triangles, s.delta_e, s.delta_v, p, q));
            AlgoSummary {
                algo: algo.name(),
                trials: rows.len() as u64,
                mean: summary.mean,
                variance: summary.variance,
                mean_stored_max: rows.iter().map(|r| r.stored_max as f64).sum::<f64>() / rows.len() as f64,
                variance_bound: bound,
            }
        })
        .collect()
}

pub const CSV_HEADER: &str = "algo,trial,seed,p,q,estimate,exact_T,rel_error,stored_max,elapsed_ms";

pub fn write_csv<W: io::Write>(records: &[BenchRecord], out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_friendship;
    use crate::graph::graph_stats;

    fn config(algos: Vec<Algorithm>, trials: u64) -> BenchConfig {
        BenchConfig {
            algos,
            trials,
            master_seed: 1,
            timing: false,
        }
    }

    #[test]
    fn single_trial_summary_is_that_trial() {
        let g = gen_friendship(4, 3);
        let edges: Vec<_> = g.edges().collect();
        let algos = vec![Algorithm::Opt { p: 0.5, q: 0.5 }];
        let recs = run_bench(&edges, Some(4), &config(algos.clone(), 1)).unwrap();
        let s = summarize(&recs, &algos, None);
        assert_eq!(s[0].mean, recs[0].estimate);
        assert_eq!(s[0].variance, 0.0);
        assert_eq!(s[0].variance_bound, None);
    }

    #[test]
    fn exact_mode_has_zero_variance() {
        let g = gen_friendship(4, 3);
        let stats = graph_stats(&g);
        let edges: Vec<_> = g.edges().collect();
        let algos = vec![Algorithm::Opt { p: 1.0, q: 1.0 }];
        let recs = run_bench(&edges, Some(4), &config(algos.clone(), 25)).unwrap();
        assert!(recs.iter().all(|r| r.rel_error == Some(0.0)));
        let s = summarize(&recs, &algos, Some(&stats));
        assert_eq!((s[0].mean, s[0].variance), (4.0, 0.0));
        assert_eq!(s[0].variance_bound, Some(variance_bound(4, 1, 4, 1.0, 1.0)));
    }

    #[test]
    fn records_are_ordered() {
        let edges: Vec<_> = gen_friendship(3, 0).edges().collect();
        let algos = vec![Algorithm::Tkmf { q: 0.5 }, Algorithm::Colorful { k: 2 }];
        let recs = run_bench(&edges, None, &config(algos, 4)).unwrap();
        let keys: Vec<_> = recs.iter().map(|r| (r.algo, r.trial)).collect();
        assert_eq!(
            keys,
            vec![
                ("tkmf", 0), ("tkmf", 1), ("tkmf", 2), ("tkmf", 3),
                ("colorful", 0), ("colorful", 1), ("colorful", 2), ("colorful", 3),
            ]
        );
        assert!(recs.iter().all(|r| r.rel_error.is_none() && r.elapsed_ms == 0.0));
    }

    #[test]
    fn rejects_zero_trials_and_bad_params() {
        assert!(run_bench(&[], None, &config(vec![Algorithm::Wedge { q: 0.5 }], 0)).is_err());
        assert!(run_bench(&[], None, &config(vec![Algorithm::Wedge { q: 2.0 }], 1)).is_err());
    }

    #[test]
    fn csv_layout() {
        let edges: Vec<_> = gen_friendship(2, 0).edges().collect();
        let recs = run_bench(&edges, Some(2), &config(vec![Algorithm::Opt { p: 1.0, q: 1.0 }], 1)).unwrap();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let seed = trial_seed(1, 0);
        assert_eq!(text, format!("{CSV_HEADER}\nopt,0,{seed},1.0,1.0,2.0,2,0.0,6,0.0\n"));

        let recs = run_bench(&edges, None, &config(vec![Algorithm::Opt { p: 1.0, q: 1.0 }], 1)).unwrap();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with(",2.0,,,6,0.0\n"));
    }
}
