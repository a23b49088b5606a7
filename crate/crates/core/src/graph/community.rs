//! Greedy agglomerative modularity maximization (Clauset–Newman–Moore),
//! run separately inside each connected component.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{components, ComponentPartition, Network, PartitionKind};

/// One accepted merge: the observed component it happened in, the surviving
/// part (lower id), the absorbed part, and that component's modularity after
/// merging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub component: usize,
    pub into: usize,
    pub from: usize,
    pub modularity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityTrace {
    /// Singleton-partition modularity of each observed component.
    pub initial_modularity: Vec<f64>,
    pub merges: Vec<Merge>,
}

impl CommunityTrace {
    pub fn final_modularity(&self, component: usize) -> f64 {
        self.merges
            .iter()
            .rev()
            .find(|m| m.component == component)
            .map_or(self.initial_modularity[component], |m| m.modularity)
    }

    /// Whether every merge raised its component's modularity.
    pub fn strictly_increasing(&self) -> bool {
        let mut current = self.initial_modularity.clone();
        for m in &self.merges {
            if !(m.modularity > current[m.component]) {
                return false;
            }
            current[m.component] = m.modularity;
        }
        true
    }
}

pub fn fast_greedy_communities(net: &Network) -> ComponentPartition {
    fast_greedy_with_trace(net).0
}

/// Runs the greedy agglomeration and also returns the modularity after every
/// merge.
///
/// Within a component with `M` edges, merging `c` and `d` with `l` edges
/// between them and degree sums `D_c`, `D_d` scores `2M·l − D_c·D_d`, which
/// is `ΔQ·2M²`; gains are compared in exact integer arithmetic. Ties go to
/// the lexicographically smallest `(min id, max id)` pair. Components never
/// interact, so the interleaving of their merges does not affect the result.
pub fn fast_greedy_with_trace(net: &Network) -> (ComponentPartition, CommunityTrace) {
    let n = net.n();
    let comps = components(net);
    let comp_of = comps.assignment();
    let mut comp_edges = vec![0i64; comps.m()];
    for (i, _) in net.edges() {
        comp_edges[comp_of[i]] += 1;
    }

    let mut degree_sum: Vec<i64> = (0..n).map(|i| net.degree(i) as i64).collect();
    let mut links: Vec<BTreeMap<usize, i64>> = (0..n)
        .map(|i| net.neighbors(i).iter().map(|&j| (j, 1)).collect())
        .collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    // Per component, Q·4M² = Σ_c (4M·l_c − D_c²).
    let mut q_num = vec![0i128; comps.m()];
    for i in 0..n {
        q_num[comp_of[i]] -= (degree_sum[i] as i128) * (degree_sum[i] as i128);
    }
    let scale = |k: usize| {
        let m = comp_edges[k] as f64;
        if m == 0.0 {
            1.0
        } else {
            4.0 * m * m
        }
    };
    let initial_modularity: Vec<f64> = (0..comps.m()).map(|k| q_num[k] as f64 / scale(k)).collect();
    let mut merges = Vec::new();

    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for c in 0..n {
            let big_m = comp_edges[comp_of[c]];
            for (&d, &l) in links[c].range(c + 1..) {
                let gain = 2 * big_m * l - degree_sum[c] * degree_sum[d];
                let better = match best {
                    None => true,
                    Some((g, bc, bd)) => gain > g || (gain == g && (c, d) < (bc, bd)),
                };
                if better {
                    best = Some((gain, c, d));
                }
            }
        }
        let Some((gain, c, d)) = best else { break };
        if gain <= 0 {
            break;
        }

        links[c].remove(&d);
        links[d].remove(&c);
        let absorbed = core::mem::take(&mut links[d]);
        for (e, l) in absorbed {
            *links[c].entry(e).or_insert(0) += l;
            let back = links[e].remove(&d).unwrap_or(0);
            *links[e].entry(c).or_insert(0) += back;
        }
        degree_sum[c] += degree_sum[d];
        degree_sum[d] = 0;
        let moved = core::mem::take(&mut members[d]);
        members[c].extend(moved);

        let k = comp_of[c];
        q_num[k] += 2 * gain as i128;
        merges.push(Merge {
            component: k,
            into: c,
            from: d,
            modularity: q_num[k] as f64 / scale(k),
        });
    }

    let mut label: Vec<usize> = (0..n).collect();
    for (c, list) in members.iter().enumerate() {
        for &i in list {
            label[i] = c;
        }
    }
    (
        ComponentPartition::from_labels(net, &label, PartitionKind::CommunityDetected),
        CommunityTrace {
            initial_modularity,
            merges,
        },
    )
}

/// Newman modularity of a labelling.
pub fn modularity(net: &Network, labels: &[usize]) -> f64 {
    let m = net.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for i in 0..net.n() {
        *degree.entry(labels[i]).or_insert(0.0) += net.degree(i) as f64;
    }
    for (i, j) in net.edges() {
        if labels[i] == labels[j] {
            *internal.entry(labels[i]).or_insert(0.0) += 1.0;
        }
    }
    degree
        .iter()
        .map(|(c, d)| internal.get(c).copied().unwrap_or(0.0) / m - (d / (2.0 * m)) * (d / (2.0 * m)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::components;

    fn two_cliques() -> Network {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j));
                }
            }
        }
        edges.push((3, 4));
        Network::from_index_edges(8, &edges).unwrap()
    }

    #[test]
    fn triangle_stays_whole() {
        let net = Network::from_index_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(fast_greedy_communities(&net).m(), 1);
    }

    #[test]
    fn edgeless_graph_stays_singletons() {
        let net = Network::from_index_edges(5, &[]).unwrap();
        assert_eq!(fast_greedy_communities(&net).m(), 5);
    }

    #[test]
    fn two_cliques_split_at_bridge() {
        let net = two_cliques();
        let (p, trace) = fast_greedy_with_trace(&net);
        assert_eq!(p.m(), 2);
        assert_eq!(p.assignment(), &[0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(p.cut_edges(), 1);
        assert!((trace.final_modularity(0) - modularity(&net, p.assignment())).abs() < 1e-12);
    }

    #[test]
    fn trace_is_strictly_increasing() {
        let net = two_cliques();
        let (_, trace) = fast_greedy_with_trace(&net);
        assert!(!trace.merges.is_empty());
        assert!(trace.strictly_increasing());
    }

    #[test]
    fn never_joins_components() {
        let net = Network::from_index_edges(6, &[(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let obs = components(&net);
        let p = fast_greedy_communities(&net);
        for i in 0..6 {
            for j in 0..6 {
                if p.part_of(i) == p.part_of(j) {
                    assert_eq!(obs.part_of(i), obs.part_of(j));
                }
            }
        }
    }
}
