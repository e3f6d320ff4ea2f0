use proptest::prelude::*;

use tristream_core::generators::{gen_er, Family, GeneratorSpec};
use tristream_core::{exact_triangle_count, graph_stats, load_edge_list, Edge, Graph, LoadMode};

/// Random simple graph on `0..n` given as a bitmask over vertex pairs.
fn graph_strategy(max_n: u64) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = (n * (n - 1) / 2) as usize;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |mask| {
            let mut edges = Vec::new();
            let mut i = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if mask[i] {
                        edges.push(Edge::new(a, b).unwrap());
                    }
                    i += 1;
                }
            }
            Graph::from_edges(edges).unwrap()
        })
    })
}

/// Dense adjacency over the vertex ids that appear.
fn dense(g: &Graph) -> Vec<Vec<u64>> {
    let ids: Vec<u64> = g.vertices().collect();
    let idx = |x: u64| ids.binary_search(&x).unwrap();
    let mut a = vec![vec![0u64; ids.len()]; ids.len()];
    for e in g.edges() {
        let (u, v) = e.endpoints();
        a[idx(u)][idx(v)] = 1;
        a[idx(v)][idx(u)] = 1;
    }
    a
}

fn trace_cubed_over_six(g: &Graph) -> u64 {
    let a = dense(g);
    let n = a.len();
    let mut trace = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                trace += a[i][j] * a[j][k] * a[k][i];
            }
        }
    }
    trace / 6
}

/// Brute-force (max triangles on one edge, max on one vertex).
fn brute_sharing(g: &Graph) -> (u64, u64) {
    let a = dense(g);
    let n = a.len();
    let (mut per_edge, mut per_vertex) = (vec![vec![0u64; n]; n], vec![0u64; n]);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if a[i][j] == 1 && a[j][k] == 1 && a[i][k] == 1 {
                    for (x, y) in [(i, j), (j, k), (i, k)] {
                        per_edge[x][y] += 1;
                    }
                    for x in [i, j, k] {
                        per_vertex[x] += 1;
                    }
                }
            }
        }
    }
    let de = per_edge.iter().flatten().copied().max().unwrap_or(0);
    let dv = per_vertex.iter().copied().max().unwrap_or(0);
    (de, dv)
}

proptest! {
    #[test]
    fn count_matches_matrix_trace(g in graph_strategy(12)) {
        prop_assert_eq!(exact_triangle_count(&g), trace_cubed_over_six(&g));
    }

    #[test]
    fn stats_match_brute_force(g in graph_strategy(10)) {
        let s = graph_stats(&g);
        prop_assert_eq!(s.triangles, trace_cubed_over_six(&g));
        prop_assert_eq!((s.delta_e, s.delta_v), brute_sharing(&g));
        prop_assert_eq!(s.m, g.m() as u64);
        prop_assert_eq!(s.n, g.n() as u64);
        prop_assert_eq!(s.d, g.max_degree() as u64);
        prop_assert!(s.delta_e <= s.delta_v && s.delta_v <= s.triangles);
    }

    #[test]
    fn stats_invariant_under_relabeling(g in graph_strategy(10), salt in any::<u64>()) {
        // odd multipliers permute u64
        let relabel = |x: u64| x.wrapping_mul(salt | 1);
        let h = Graph::from_edges(g.edges().map(|e| {
            let (u, v) = e.endpoints();
            Edge::new(relabel(u), relabel(v)).unwrap()
        }))
        .unwrap();
        prop_assert_eq!(graph_stats(&g), graph_stats(&h));
    }

    #[test]
    fn edge_list_round_trip(g in graph_strategy(10)) {
        let text: String = g.edges().map(|e| format!("{e}\n")).collect();
        let stream = load_edge_list(text.as_bytes(), LoadMode::Strict).unwrap();
        prop_assert_eq!(stream.len(), g.m());
        prop_assert!(stream.iter().eq(g.edges()));
    }
}

#[test]
fn families_match_their_profiles() {
    let families = [
        Family::Complete { n: 7 },
        Family::Book { k: 16 },
        Family::Friendship { k: 16 },
        Family::Disjoint { t: 16 },
        Family::Book { k: 1 },
    ];
    for family in families {
        for pad in [0, 1, 37] {
            let g = GeneratorSpec { family, pad_edges: pad, seed: 0 }.build().unwrap();
            let unpadded = GeneratorSpec { family, pad_edges: 0, seed: 0 }.build().unwrap();
            let s = graph_stats(&g);
            let want = family.profile().unwrap();
            assert_eq!(
                (s.triangles, s.delta_e, s.delta_v),
                (want.triangles, want.delta_e, want.delta_v),
                "{family:?} pad {pad}"
            );
            assert_eq!(s.m, unpadded.m() as u64 + pad);
            assert_eq!(s.triangles, trace_cubed_over_six(&g));
        }
    }
}

#[test]
fn random_graphs_have_requested_size() {
    for seed in 0..10 {
        let g = gen_er(30, 150, seed).unwrap();
        assert_eq!(g.m(), 150);
        assert!(g.vertices().all(|v| v < 30));
        assert_eq!(exact_triangle_count(&g), trace_cubed_over_six(&g));
    }
    assert_eq!(gen_er(30, 200, 2).unwrap(), gen_er(30, 200, 2).unwrap());
}
