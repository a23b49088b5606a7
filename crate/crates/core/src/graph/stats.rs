use libm::sqrt;

use super::{components, Network};

/// Descriptive network statistics. Ratios that are undefined for the input
/// (transitivity below three nodes, assortativity with no degree variance)
/// are reported as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkStats {
    pub nodes: usize,
    pub edges: usize,
    pub components: usize,
    pub mean_degree: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd_degree: f64,
    pub density: f64,
    pub transitivity: f64,
    pub assortativity: f64,
}

pub fn network_stats(net: &Network) -> NetworkStats {
    let n = net.n();
    let edges = net.edge_count();
    let nf = n as f64;
    let mean_degree = 2.0 * edges as f64 / nf;
    let sd_degree = if n > 1 {
        let ss: f64 = (0..n)
            .map(|i| {
                let d = net.degree(i) as f64 - mean_degree;
                d * d
            })
            .sum();
        sqrt(ss / (nf - 1.0))
    } else {
        f64::NAN
    };
    let density = if n > 1 {
        edges as f64 / (nf * (nf - 1.0) / 2.0)
    } else {
        f64::NAN
    };
    NetworkStats {
        nodes: n,
        edges,
        components: components(net).m(),
        mean_degree,
        sd_degree,
        density,
        transitivity: transitivity(net),
        assortativity: assortativity(net),
    }
}

/// Global clustering: 3·triangles / connected triples.
pub fn transitivity(net: &Network) -> f64 {
    if net.n() < 3 {
        return f64::NAN;
    }
    let mut closed = 0u64;
    let mut triples = 0u64;
    for v in 0..net.n() {
        let nb = net.neighbors(v);
        let d = nb.len() as u64;
        triples += d * d.saturating_sub(1) / 2;
        for (a, &x) in nb.iter().enumerate() {
            for &y in &nb[a + 1..] {
                if net.has_edge(x, y) {
                    closed += 1;
                }
            }
        }
    }
    if triples == 0 {
        return f64::NAN;
    }
    // Each triangle is closed at all three of its vertices.
    closed as f64 / triples as f64
}

/// Pearson correlation of the degrees at either end of each edge, with both
/// orientations counted.
pub fn assortativity(net: &Network) -> f64 {
    let m = net.edge_count();
    if m == 0 {
        return f64::NAN;
    }
    let (mut s1, mut s2, mut sxy) = (0.0, 0.0, 0.0);
    for (i, j) in net.edges() {
        let (di, dj) = (net.degree(i) as f64, net.degree(j) as f64);
        s1 += di + dj;
        s2 += di * di + dj * dj;
        sxy += 2.0 * di * dj;
    }
    let cnt = 2.0 * m as f64;
    let mean = s1 / cnt;
    let var = s2 / cnt - mean * mean;
    let cov = sxy / cnt - mean * mean;
    if var <= 1e-14 * s2 / cnt {
        return f64::NAN;
    }
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn complete_graph_is_fully_transitive() {
        let net = Network::from_index_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let s = network_stats(&net);
        assert_eq!(s.transitivity, 1.0);
        assert_eq!(s.density, 1.0);
        assert!(s.assortativity.is_nan());
    }

    #[test]
    fn star_has_zero_transitivity() {
        let edges: Vec<(usize, usize)> = (1..5).map(|j| (0, j)).collect();
        let net = Network::from_index_edges(5, &edges).unwrap();
        let s = network_stats(&net);
        assert_eq!(s.transitivity, 0.0);
        assert!((s.assortativity + 1.0).abs() < 1e-12);
        assert_eq!(s.mean_degree, 8.0 / 5.0);
    }

    #[test]
    fn two_nodes_have_undefined_transitivity() {
        let net = Network::from_index_edges(2, &[(0, 1)]).unwrap();
        assert!(network_stats(&net).transitivity.is_nan());
    }

    #[test]
    fn density_is_edges_over_pairs() {
        let net = Network::from_index_edges(6, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let s = network_stats(&net);
        assert!((s.density - 3.0 / 15.0).abs() < 1e-15);
        assert_eq!(s.components, 3);
    }
}
