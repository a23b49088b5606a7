//! Synthetic stand-in for a private HIV risk network: ten components with
//! sizes 185, 9, 6, 3, 3 and five dyads (216 nodes, 362 edges), with node
//! data at roughly 11.6% exposure. Nothing here comes from real people.

use std::collections::BTreeSet;

use netspill_core::graph::{components, Network};
use netspill_core::math::expit;
use netspill_core::simulate::stratified_probability;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::io::DataTable;

pub const SIZES: [usize; 10] = [185, 9, 6, 3, 3, 2, 2, 2, 2, 2];
/// Edges per component, summing to 362.
pub const EDGES: [usize; 10] = [334, 12, 7, 2, 2, 1, 1, 1, 1, 1];
pub const NETWORK_SEED: u64 = 2;
pub const DATA_SEED: u64 = 39;

pub const EDGES_CSV: &str = include_str!("../fixtures/trip_like_edges.csv");
pub const DATA_CSV: &str = include_str!("../fixtures/trip_like_data.csv");

fn node_id(i: usize) -> String {
    format!("p{:03}", i + 1)
}

/// Random tree plus extra edges, half of them closing triangles.
fn component_edges(offset: usize, size: usize, edges: usize, rng: &mut ChaCha8Rng) -> BTreeSet<(usize, usize)> {
    let mut set = BTreeSet::new();
    let mut adj = vec![Vec::new(); size];
    let add = |a: usize, b: usize, set: &mut BTreeSet<(usize, usize)>, adj: &mut Vec<Vec<usize>>| {
        if a != b && set.insert((a.min(b), a.max(b))) {
            adj[a].push(b);
            adj[b].push(a);
        }
    };
    for i in 1..size {
        let parent = rng.random_range(0..i);
        add(i, parent, &mut set, &mut adj);
    }
    assert!(edges <= size * (size - 1) / 2);
    while set.len() < edges {
        let a = rng.random_range(0..size);
        let b = if rng.random_bool(0.5) && !adj[a].is_empty() {
            let mid = adj[a][rng.random_range(0..adj[a].len())];
            adj[mid][rng.random_range(0..adj[mid].len())]
        } else {
            rng.random_range(0..size)
        };
        add(a, b, &mut set, &mut adj);
    }
    set.into_iter().map(|(a, b)| (a + offset, b + offset)).collect()
}

pub fn trip_like_network(seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    let mut offset = 0;
    for (&size, &e) in SIZES.iter().zip(EDGES.iter()) {
        pairs.extend(component_edges(offset, size, e, &mut rng));
        offset += size;
    }
    let rows: Vec<(String, String)> = pairs.iter().map(|&(a, b)| (node_id(a), node_id(b))).collect();
    Network::from_edges(rows).expect("fixture edges are valid")
}

/// Node data: `z1 ~ Bern(0.5)`, `z2 ~ N(0, 1)`, exposure from a
/// component random-intercept logistic model, outcomes from the
/// stratified outcome model.
pub fn trip_like_data(net: &Network, seed: u64) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let n = net.n();
    let covariates: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let z1 = f64::from(u8::from(rng.random_bool(0.5)));
            let z2: f64 = normal.sample(&mut rng);
            vec![z1, (z2 * 1e4).round() / 1e4]
        })
        .collect();
    let parts = components(net);
    let b: Vec<f64> = (0..parts.m()).map(|_| 0.5 * normal.sample(&mut rng)).collect();
    let exposure: Vec<bool> = (0..n)
        .map(|i| {
            let z = &covariates[i];
            rng.random_bool(expit(-1.8 - 0.5 * z[0] + 0.3 * z[1] + b[parts.part_of(i)]))
        })
        .collect();
    let outcome = (0..n)
        .map(|i| {
            let d = net.degree(i);
            let s = net.neighbors(i).iter().filter(|&&j| exposure[j]).count();
            let p = stratified_probability(exposure[i], s, d, covariates[i][0]);
            Some(f64::from(u8::from(rng.random_bool(p))))
        })
        .collect();
    DataTable {
        ids: net.ids().to_vec(),
        exposure,
        outcome,
        covariates,
        covariate_names: vec!["z1".into(), "z2".into()],
    }
}

/// The bundled network, parsed from the shipped edge list.
pub fn network() -> Network {
    crate::io::parse_edges(EDGES_CSV.as_bytes()).expect("bundled edges parse")
}

/// The bundled node data, parsed from the shipped data file.
pub fn data() -> DataTable {
    crate::io::parse_data(DATA_CSV.as_bytes()).expect("bundled data parse")
}
