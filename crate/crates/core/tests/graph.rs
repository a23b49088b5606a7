mod common;

use std::collections::BTreeSet;

use netspill_core::graph::{
    components, fast_greedy_communities, fast_greedy_with_trace, modularity, network_stats, Network, PartitionKind,
};
use proptest::prelude::*;

/// Newman modularity straight from the definition.
fn modularity_oracle(net: &Network, labels: &[usize]) -> f64 {
    let m2 = 2.0 * net.edge_count() as f64;
    let mut q = 0.0;
    for i in 0..net.n() {
        for j in 0..net.n() {
            if labels[i] != labels[j] {
                continue;
            }
            let a = if net.has_edge(i, j) { 1.0 } else { 0.0 };
            q += a - (net.degree(i) * net.degree(j)) as f64 / m2;
        }
    }
    q / m2
}

/// Every set partition of `0..n` as a restricted growth string.
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            prefix.push(l);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

fn two_cliques() -> Network {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((base + u, base + v));
            }
        }
    }
    edges.push((3, 4));
    Network::from_index_edges(8, &edges).unwrap()
}

#[test]
fn two_cliques_match_the_exhaustive_optimum() {
    let net = two_cliques();
    let (part, trace) = fast_greedy_with_trace(&net);
    assert!(trace.strictly_increasing());
    assert_eq!(part.m(), 2);
    assert_eq!(part.kind(), PartitionKind::CommunityDetected);

    let partitions = all_partitions(8);
    assert_eq!(partitions.len(), 4140);
    let best_two = partitions
        .iter()
        .filter(|p| p.iter().max() == Some(&1))
        .max_by(|a, b| modularity_oracle(&net, a).total_cmp(&modularity_oracle(&net, b)))
        .unwrap();
    let best_any = partitions
        .iter()
        .max_by(|a, b| modularity_oracle(&net, a).total_cmp(&modularity_oracle(&net, b)))
        .unwrap();
    assert!(same_partition(part.assignment(), best_two));
    assert!(same_partition(part.assignment(), best_any));
    let q = modularity_oracle(&net, part.assignment());
    assert!((trace.final_modularity(0) - q).abs() < 1e-12);
    assert!((modularity(&net, part.assignment()) - q).abs() < 1e-12);
}

#[test]
fn triangle_and_edgeless_graphs() {
    let tri = Network::from_index_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    assert_eq!(fast_greedy_communities(&tri).m(), 1);
    let empty = Network::from_index_edges(4, &[]).unwrap();
    let p = fast_greedy_communities(&empty);
    assert_eq!(p.m(), 4);
    assert_eq!(components(&empty).m(), 4);
}

#[test]
fn components_of_five_and_eight() {
    // Components {1..5} and {6..13}.
    let rows = [
        ("1", "2"), ("2", "3"), ("3", "4"), ("4", "5"), ("5", "1"), ("2", "4"),
        ("6", "7"), ("7", "8"), ("8", "9"), ("9", "10"), ("10", "11"), ("11", "12"), ("12", "13"), ("13", "6"),
    ];
    let net = Network::from_edges(rows).unwrap();
    let mut sizes = components(&net).sizes();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![5, 8]);
}

#[test]
fn descriptive_statistics_by_hand() {
    // Path a-b-c-d plus a triangle e-f-g.
    let net = Network::from_edges([("a", "b"), ("b", "c"), ("c", "d"), ("e", "f"), ("f", "g"), ("g", "e")]).unwrap();
    let s = network_stats(&net);
    assert_eq!((s.nodes, s.edges, s.components), (7, 6, 2));
    assert!((s.mean_degree - 12.0 / 7.0).abs() < 1e-15);
    let degs = [1.0, 2.0, 2.0, 1.0, 2.0, 2.0, 2.0];
    let mean = 12.0 / 7.0;
    let sd = (degs.iter().map(|d: &f64| (d - mean).powi(2)).sum::<f64>() / 6.0).sqrt();
    assert!((s.sd_degree - sd).abs() < 1e-15);
    assert!((s.density - 6.0 / 21.0).abs() < 1e-15);
    // Triples: path centres b, c give 1 each; triangle gives 3 closed of 3.
    assert!((s.transitivity - 3.0 / 5.0).abs() < 1e-15);
    assert!((-1.0..=1.0).contains(&s.assortativity));
}

fn edge_rows() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..9).prop_flat_map(|n| {
        let pair = (0..n, 0..n).prop_filter("no self-loops", |(a, b)| a != b);
        (Just(n), prop::collection::vec(pair, 0..24))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjacency_is_symmetric_and_deduplicated((n, rows) in edge_rows()) {
        let net = Network::from_index_edges(n, &rows).unwrap();
        let distinct: BTreeSet<(usize, usize)> = rows.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        prop_assert_eq!(net.edge_count(), distinct.len());
        for i in 0..n {
            prop_assert!(!net.neighbors(i).contains(&i));
            prop_assert!(net.neighbors(i).windows(2).all(|w| w[0] < w[1]));
            for &j in net.neighbors(i) {
                prop_assert!(net.neighbors(j).contains(&i));
            }
        }
        let parts = components(&net);
        let mut seen = vec![0usize; n];
        for part in parts.parts() {
            prop_assert!(!part.is_empty());
            for &i in part {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(parts.cut_edges(), 0);
        for (i, j) in net.edges() {
            prop_assert_eq!(parts.part_of(i), parts.part_of(j));
        }
        let s = network_stats(&net);
        prop_assert!((s.density - net.edge_count() as f64 / (n * (n - 1) / 2) as f64).abs() < 1e-12);
        prop_assert!(s.transitivity.is_nan() || (0.0..=1.0).contains(&s.transitivity));
    }

    #[test]
    fn greedy_merges_raise_modularity_and_respect_components((n, rows) in edge_rows()) {
        let net = Network::from_index_edges(n, &rows).unwrap();
        let (part, trace) = fast_greedy_with_trace(&net);
        prop_assert!(trace.strictly_increasing());
        let comps = components(&net);
        for i in 0..n {
            for j in 0..n {
                if part.part_of(i) == part.part_of(j) {
                    prop_assert_eq!(comps.part_of(i), comps.part_of(j));
                }
            }
        }
        // Running on each component alone gives the same parts.
        for c in 0..comps.m() {
            let keep: Vec<bool> = (0..n).map(|i| comps.part_of(i) == c).collect();
            let members: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
            let sub = net.induced(&keep);
            let alone = fast_greedy_communities(&sub);
            let joint: Vec<usize> = members.iter().map(|&i| part.part_of(i)).collect();
            prop_assert!(same_partition(alone.assignment(), &joint));
            if sub.edge_count() > 0 {
                let q = modularity_oracle(&sub, alone.assignment());
                prop_assert!((trace.final_modularity(c) - q).abs() < 1e-12);
                // Greedy never beats the exhaustive optimum.
                let best = all_partitions(sub.n())
                    .iter()
                    .map(|p| modularity_oracle(&sub, p))
                    .fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(q <= best + 1e-12);
            }
        }
    }
}
