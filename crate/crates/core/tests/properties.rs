//! Property tests for the structural invariants: degree splits, round trips,
//! distance axioms, block-matrix consistency and merge-loop behavior.

use std::collections::HashSet;
use std::io::Cursor;

use proptest::prelude::*;

use cbc_core::cbc::{self, CbcParams};
use cbc_core::centrality::{betweenness, find_tails, strip_tails};
use cbc_core::clustering::Clustering;
use cbc_core::graph::{Graph, GraphBuilder, NodeId};
use cbc_core::io::{read_edge_list, write_edge_list};
use cbc_core::metrics::{clustering_distance, duplication_rate, is_community, node_similarity};

fn build_graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    let mut b = GraphBuilder::new();
    for v in 0..n {
        b.intern(&format!("n{v}"));
    }
    for &(u, v) in edges {
        b.add_edge_ids((u % n) as NodeId, (v % n) as NodeId);
    }
    b.build().0
}

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (2usize..30).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..90).prop_map(move |edges| build_graph(n, &edges))
    })
}

fn clustering_strategy(n: usize) -> impl Strategy<Value = Clustering> {
    prop::collection::vec(prop::collection::vec(0..n as NodeId, 1..=n), 0..5)
        .prop_map(move |sets| Clustering::from_member_sets(n, sets))
}

fn graph_with_clustering() -> impl Strategy<Value = (Graph, Clustering)> {
    graph_strategy().prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), clustering_strategy(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_split_sums_match_cut_sizes((g, members) in graph_strategy().prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), prop::collection::hash_set(0..n as NodeId, 0..=n))
    })) {
        let mut internal_sum = 0usize;
        let mut external_sum = 0usize;
        for &v in &members {
            let split = g.degree_split(v, &members).unwrap();
            prop_assert_eq!(split.internal + split.external, g.degree(v));
            internal_sum += split.internal;
            external_sum += split.external;
        }
        let cut = g.cut_sizes(&members).unwrap();
        prop_assert_eq!(internal_sum, 2 * cut.internal);
        prop_assert_eq!(external_sum, cut.external);
    }

    #[test]
    fn edge_list_round_trip_ignores_input_order(
        (n, edges) in (2usize..30).prop_flat_map(|n| {
            (Just(n), prop::collection::vec((0..n, 0..n), 1..60).prop_shuffle())
        })
    ) {
        let lines: Vec<String> = edges
            .iter()
            .map(|&(u, v)| format!("n{} n{}", u % n, v % n))
            .collect();
        let text = lines.join("\n");
        let Ok((g1, _)) = read_edge_list(Cursor::new(&text)) else {
            // Only self-loops: nothing to round-trip.
            return Ok(());
        };
        let mut reversed: Vec<&String> = lines.iter().collect();
        reversed.reverse();
        let text2 = reversed
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        let (g2, _) = read_edge_list(Cursor::new(&text2)).unwrap();

        let mut out1 = Vec::new();
        let mut out2 = Vec::new();
        write_edge_list(&mut out1, &g1).unwrap();
        write_edge_list(&mut out2, &g2).unwrap();
        prop_assert_eq!(out1, out2);
    }

    #[test]
    fn distance_axioms_hold((g, a, b) in graph_strategy().prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), clustering_strategy(n), clustering_strategy(n))
    })) {
        let d_ab = clustering_distance(&a, &b).unwrap();
        let d_ba = clustering_distance(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&d_ab));
        prop_assert_eq!(d_ab, d_ba);
        prop_assert_eq!(clustering_distance(&a, &a).unwrap(), 0.0);
        let _ = g;
    }

    #[test]
    fn similarity_stays_in_unit_interval((g, c) in graph_with_clustering()) {
        let n = g.node_count() as NodeId;
        for a in 0..n.min(6) {
            for b in 0..n.min(6) {
                let s = node_similarity(a, b, &c);
                prop_assert!((0.0..=1.0).contains(&s));
            }
        }
    }

    #[test]
    fn community_test_is_monotone_in_strictness(
        (g, members, s1, s2) in graph_strategy().prop_flat_map(|g| {
            let n = g.node_count();
            (
                Just(g),
                prop::collection::vec(0..n as NodeId, 1..=n),
                0.05f64..2.0,
                0.05f64..2.0,
            )
        })
    ) {
        let mut members = members;
        members.sort_unstable();
        members.dedup();
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        if is_community(&g, &members, lo) {
            prop_assert!(is_community(&g, &members, hi));
        }
    }

    #[test]
    fn drate_bounds_and_overlap_detection((g, c) in graph_with_clustering()) {
        let rate = duplication_rate(&c);
        let counts = c.membership_counts();
        let clustered = counts.iter().any(|&x| x > 0);
        if clustered {
            prop_assert!(rate >= 1.0);
            let overlapping = counts.iter().any(|&x| x > 1);
            if overlapping {
                prop_assert!(rate > 1.0);
            } else {
                prop_assert_eq!(rate, 1.0);
            }
        } else {
            prop_assert_eq!(rate, 0.0);
        }
        let _ = g;
    }

    #[test]
    fn block_matrix_is_symmetric_with_cut_diagonal((g, c) in graph_with_clustering()) {
        let b = cbc::build_block_matrix(&g, &c);
        for i in 0..c.len() {
            for j in 0..c.len() {
                prop_assert_eq!(b.get(i, j), b.get(j, i));
            }
            let members: HashSet<NodeId> = c.clusters()[i].members().iter().copied().collect();
            let cut = g.cut_sizes(&members).unwrap();
            prop_assert_eq!(b.get(i, i), cut.internal as u64);
        }
    }

    #[test]
    fn merge_loop_never_grows_the_clustering((g, mut c) in graph_with_clustering()) {
        let before = c.len();
        cbc::merge_loop(&g, &mut c, &CbcParams::default());
        prop_assert!(c.len() <= before);
    }

    #[test]
    fn tail_decomposition_partitions_the_nodes(g in graph_strategy()) {
        let t = find_tails(&g);
        let mut seen = vec![false; g.node_count()];
        for &v in t.core.iter().chain(t.tails.iter().flat_map(|t| t.members.iter())) {
            prop_assert!(!seen[v as usize], "node {} listed twice", v);
            seen[v as usize] = true;
        }
        prop_assert!(seen.iter().all(|&s| s));
        for tail in &t.tails {
            if let Some(att) = tail.attachment {
                prop_assert!(t.core.binary_search(&att).is_ok());
            }
        }
        let stripped = strip_tails(&g, &t).unwrap();
        prop_assert_eq!(stripped.skipped, t.core.is_empty());
    }
}

#[test]
fn betweenness_identical_at_any_thread_count() {
    let mut b = GraphBuilder::new();
    let n = 120u32;
    for v in 0..n {
        b.intern(&v.to_string());
    }
    let mut x = 3u64;
    for _ in 0..600 {
        x = x
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let u = ((x >> 33) % n as u64) as NodeId;
        x = x
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let v = ((x >> 33) % n as u64) as NodeId;
        b.add_edge_ids(u, v);
    }
    let (g, _) = b.build();

    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| betweenness(&g));
    let quad = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| betweenness(&g));
    assert_eq!(
        single.as_slice(),
        quad.as_slice(),
        "scores must not depend on thread count"
    );
}

#[test]
fn pipeline_identical_at_any_thread_count() {
    use cbc_core::fwgen::{self, EdgeBudget, GenParams};
    let (g, _) = fwgen::generate(&GenParams {
        n_nodes: 400,
        edges: EdgeBudget::Count(2400),
        n_clusters: 5,
        skew: 0.1,
        assortativity: 0.9,
        seed: 5,
    })
    .unwrap();
    let params = CbcParams {
        minimize_orphans: true,
        ..CbcParams::default()
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| cbc::cluster(&g, &params).unwrap());
    let quad = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| cbc::cluster(&g, &params).unwrap());
    assert_eq!(
        single.clustering.member_sets(),
        quad.clustering.member_sets()
    );
    assert_eq!(single.conforming, quad.conforming);
}
