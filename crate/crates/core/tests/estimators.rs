use proptest::prelude::*;

use tristream_core::amplification::{median_of_means, ReplicationPlan};
use tristream_core::estimators::{run_once, Algorithm, OptEstimator, PreparedEdge, StreamingEstimator};
use tristream_core::generators::{gen_er, gen_friendship, reorder, OrderPolicy};
use tristream_core::stats::Summary;
use tristream_core::{exact_triangle_count, Edge, Graph};

fn random_graph() -> impl Strategy<Value = (Graph, u64)> {
    (5u64..25, 0u64..80, any::<u64>()).prop_map(|(n, m, seed)| {
        let m = m.min(n * (n - 1) / 2);
        (gen_er(n, m, seed).unwrap(), seed)
    })
}

fn order() -> impl Strategy<Value = OrderPolicy> {
    prop_oneof![
        Just(OrderPolicy::Given),
        Just(OrderPolicy::Random),
        Just(OrderPolicy::Reverse)
    ]
}

fn prob() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(0.5), 0.05f64..1.0]
}

proptest! {
    #[test]
    fn exact_mode_matches_oracle((g, seed) in random_graph(), policy in order()) {
        let stream = reorder(g.edges().collect(), policy, seed);
        let r = run_once(&Algorithm::Opt { p: 1.0, q: 1.0 }, seed, stream.iter()).unwrap();
        prop_assert_eq!(r.estimate, exact_triangle_count(&g) as f64);
        prop_assert_eq!(r.stored_max, g.m() as u64);
    }

    #[test]
    fn each_triangle_counted_at_most_once(
        (g, seed) in random_graph(), policy in order(), p in prob(), q in prob(),
    ) {
        let stream = reorder(g.edges().collect(), policy, seed);
        let mut est = OptEstimator::new(p, q, seed).unwrap();
        est.process_all(stream.iter());
        prop_assert!(est.counter() <= exact_triangle_count(&g));
        prop_assert!(est.stored_now() <= est.stored_max());
        prop_assert!(est.stored_max() <= stream.len() as u64);
        prop_assert_eq!(est.finalize().edges_seen, stream.len() as u64);
    }

    #[test]
    fn stored_edges_are_sampled_stream_edges((g, seed) in random_graph(), p in prob(), q in prob()) {
        let mut est = OptEstimator::new(p, q, seed).unwrap();
        est.process_all(g.edges());
        for e in est.stored_edges() {
            prop_assert!(g.has_edge(e.u(), e.v()));
        }
        prop_assert_eq!(est.stored_edges().len() as u64, est.stored_now());
    }

    #[test]
    fn prepared_path_matches_plain_path((g, seed) in random_graph(), p in prob(), q in prob()) {
        let mut plain = OptEstimator::new(p, q, seed).unwrap();
        plain.process_all(g.edges());
        let batch: Vec<PreparedEdge> = g.edges().map(PreparedEdge::new).collect();
        let mut prepared = OptEstimator::new(p, q, seed).unwrap();
        prepared.process_batch(&batch);
        prop_assert_eq!(plain.finalize(), prepared.finalize());
        prop_assert_eq!(plain.stored_edges(), prepared.stored_edges());
    }

    #[test]
    fn every_algorithm_is_deterministic((g, seed) in random_graph(), q in prob()) {
        for algo in [
            Algorithm::Opt { p: q, q },
            Algorithm::Wedge { q },
            Algorithm::Vertex { p: q },
            Algorithm::Tkmf { q },
            Algorithm::Colorful { k: 3 },
        ] {
            let a = run_once(&algo, seed, g.edges()).unwrap();
            let b = run_once(&algo, seed, g.edges()).unwrap();
            prop_assert_eq!(&a, &b);
            let (p, q) = algo.report_probabilities();
            prop_assert_eq!((a.p, a.q), (p, q));
            prop_assert!((a.estimate - a.counter as f64 / (p * q * q)).abs() <= 1e-9 * a.estimate.max(1.0));
        }
    }

    #[test]
    fn amplified_exact_mode_is_exact((g, seed) in random_graph()) {
        let plan = ReplicationPlan::explicit(3, 3).unwrap();
        let amp = median_of_means(g.edges(), 1.0, 1.0, &plan, seed).unwrap();
        prop_assert_eq!(amp.estimate, exact_triangle_count(&g) as f64);
    }
}

#[test]
fn single_colour_and_full_sampling_are_exact() {
    let g = gen_er(40, 300, 5).unwrap();
    let t = exact_triangle_count(&g) as f64;
    for algo in [
        Algorithm::Colorful { k: 1 },
        Algorithm::Tkmf { q: 1.0 },
        Algorithm::Wedge { q: 1.0 },
        Algorithm::Vertex { p: 1.0 },
    ] {
        assert_eq!(run_once(&algo, 9, g.edges()).unwrap().estimate, t, "{}", algo.name());
    }
}

#[test]
fn small_sample_mean_is_near_truth() {
    let edges: Vec<Edge> = gen_friendship(6, 10).edges().collect();
    let algo = Algorithm::Opt { p: 0.5, q: 0.5 };
    let xs: Vec<f64> = (0..20_000)
        .map(|s| run_once(&algo, s, edges.iter().copied()).unwrap().estimate)
        .collect();
    let s = Summary::of(&xs);
    assert!((s.mean - 6.0).abs() <= 5.0 * s.mean_std_error(), "mean {}", s.mean);
}
