#![allow(dead_code)]

use netspill_core::data::{Aggregator, Design, StudyData};
use netspill_core::graph::Network;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph on `size` nodes: a random spanning tree plus
/// extra edges with probability `extra`.
pub fn connected_edges(size: usize, extra: f64, offset: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 1..size {
        let u = rng.random_range(0..v);
        edges.push((offset + u, offset + v));
    }
    for u in 0..size {
        for v in u + 1..size {
            if rng.random::<f64>() < extra && !edges.contains(&(offset + u, offset + v)) {
                edges.push((offset + u, offset + v));
            }
        }
    }
    edges
}

/// Disjoint union of random connected components with the given sizes.
pub fn random_network(sizes: &[usize], extra: f64, rng: &mut impl Rng) -> Network {
    let mut edges = Vec::new();
    let mut offset = 0;
    for &s in sizes {
        edges.extend(connected_edges(s, extra, offset, rng));
        offset += s;
    }
    Network::from_index_edges(offset, &edges).unwrap()
}

/// Random exposures, real outcomes, and one binary plus one normal covariate.
pub fn random_design(net: &Network, rng: &mut impl Rng) -> Design {
    let n = net.n();
    let exposure: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
    let outcome: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let cov: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![f64::from(u8::from(rng.random::<bool>())), rng.random::<f64>() * 2.0 - 1.0])
        .collect();
    let data = StudyData::new(exposure, outcome, cov).unwrap();
    Design::new(net, &data, Aggregator::Mean).unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
