use finsolv::graph::{necessary_conditions, ViewingGraph};
use finsolv::miner::{canonical_form, SmallGraph};
use proptest::prelude::*;

fn graph(max_n: usize) -> impl Strategy<Value = ViewingGraph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        prop::sample::subsequence(pairs.clone(), 1..=pairs.len())
            .prop_filter("no isolated nodes", move |edges| {
                let mut seen = vec![false; n];
                for &(a, b) in edges {
                    seen[a] = true;
                    seen[b] = true;
                }
                seen.iter().all(|&s| s)
            })
            .prop_map(move |edges| ViewingGraph::new(n, edges).unwrap())
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn edge_list_round_trip(g in graph(12)) {
        let back = ViewingGraph::parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn necessary_conditions_ignore_labels((g, perm) in graph(10).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), permutation(n))
    })) {
        let (a, mut b) = (necessary_conditions(&g), necessary_conditions(&g.relabel(&perm)));
        let mut mapped: Vec<usize> = a.articulation_points.iter().map(|&v| perm[v]).collect();
        mapped.sort_unstable();
        b.articulation_points.sort_unstable();
        prop_assert_eq!(mapped, b.articulation_points.clone());
        b.articulation_points = a.articulation_points.clone();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn canonical_code_ignores_labels((g, perm) in graph(9).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), permutation(n))
    })) {
        let a = canonical_form(&SmallGraph::from_graph(&g));
        let b = canonical_form(&SmallGraph::from_graph(&g.relabel(&perm)));
        prop_assert_eq!(a.code, b.code);
        prop_assert_eq!(a.graph, b.graph);
    }

    #[test]
    fn biconnected_means_no_cut_vertex(g in graph(10)) {
        let expect = g.is_connected() && (g.edge_count() == 1 || g.articulation_points().is_empty());
        prop_assert_eq!(g.is_biconnected(), expect);
    }
}

#[test]
fn malformed_lines_report_their_number() {
    let err = ViewingGraph::parse_edge_list("# header\n0 1\n1 x\n")
        .unwrap_err()
        .to_string();
    assert!(err.contains('3'), "{err}");
}
