use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::graph::Network;

const MAX_ATTEMPTS: usize = 1000;

/// `m` connected `degree`-regular components with Poisson(`mean_size`)
/// sizes, resampled until a size admits such a graph (`size > degree` and
/// `size·degree` even).
pub fn gen_regular_network<R: Rng + ?Sized>(m: usize, mean_size: f64, degree: usize, rng: &mut R) -> Result<Network> {
    let poisson = Poisson::new(mean_size).map_err(|_| Error::InvalidConfig(alloc::format!("mean size {mean_size}")))?;
    let mut edges = Vec::new();
    let mut offset = 0;
    for _ in 0..m {
        let mut size = None;
        for _ in 0..MAX_ATTEMPTS {
            let s = poisson.sample(rng) as usize;
            if s > degree && (s * degree) % 2 == 0 {
                size = Some(s);
                break;
            }
        }
        let size = size.ok_or(Error::InfeasibleGraph {
            size: 0,
            degree,
            attempts: MAX_ATTEMPTS,
        })?;
        for (i, j) in regular_component(size, degree, rng)? {
            edges.push((offset + i, offset + j));
        }
        offset += size;
    }
    Network::from_index_edges(offset, &edges)
}

/// Connected simple `degree`-regular graph on `size` nodes by the pairing
/// model with rejection.
pub fn regular_component<R: Rng + ?Sized>(size: usize, degree: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    let infeasible = Error::InfeasibleGraph {
        size,
        degree,
        attempts: MAX_ATTEMPTS,
    };
    if degree >= size || (size * degree) % 2 == 1 {
        return Err(infeasible);
    }
    let mut stubs: Vec<usize> = (0..size).flat_map(|i| core::iter::repeat(i).take(degree)).collect();
    'attempt: for _ in 0..MAX_ATTEMPTS {
        stubs.shuffle(rng);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
        }
        let edges: Vec<(usize, usize)> = seen.into_iter().collect();
        if connected(size, &edges) {
            return Ok(edges);
        }
    }
    Err(infeasible)
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut groups = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            groups -= 1;
        }
    }
    groups == 1
}
