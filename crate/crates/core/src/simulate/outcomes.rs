use alloc::vec;
use alloc::vec::Vec;
use libm::{log, log1p};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::math::{expit, ln_choose};

/// Largest degree for which full neighbor-vector tables are built.
pub const MAX_FULL_VECTOR_DEGREE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeModel {
    /// `logit⁻¹(−1.75 + 0.5a + s/d − 1.5·a·s/d + 0.5Z)`, keyed by `(a, s)`.
    Stratified,
    /// `logit⁻¹(−1.75 + 0.5a − 2·Σ I(Z_i=Z_j)a_j/d + 5·Σ I(Z_i≠Z_j)a_j/d + 0.5Z)`,
    /// keyed by `(a, a_{N_i})`.
    FullVector,
}

/// One Bernoulli draw of `y_i(a, ·)` for every node and every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialOutcomeTable {
    model: OutcomeModel,
    degree: Vec<usize>,
    offsets: Vec<usize>,
    cells: Vec<u8>,
}

/// Cell probability under the stratified model.
pub fn stratified_probability(a: bool, s: usize, d: usize, z: f64) -> f64 {
    let a = f64::from(u8::from(a));
    let frac = s as f64 / d as f64;
    expit(-1.75 + 0.5 * a + frac - 1.5 * a * frac + 0.5 * z)
}

fn cells_per_arm(model: OutcomeModel, d: usize) -> usize {
    match model {
        OutcomeModel::Stratified => d + 1,
        OutcomeModel::FullVector => 1 << d,
    }
}

/// Draws the table. `z` is the scalar covariate entering the outcome model.
pub fn gen_potential_outcomes<R: Rng + ?Sized>(
    net: &Network,
    z: &[f64],
    model: OutcomeModel,
    rng: &mut R,
) -> Result<PotentialOutcomeTable> {
    let n = net.n();
    let mut offsets = vec![0];
    let mut cells = Vec::new();
    let mut degree = Vec::with_capacity(n);
    for i in 0..n {
        let d = net.degree(i);
        if model == OutcomeModel::FullVector && d > MAX_FULL_VECTOR_DEGREE {
            return Err(Error::InvalidConfig(alloc::format!(
                "node {} has degree {d}; full-vector outcomes support at most {MAX_FULL_VECTOR_DEGREE}",
                net.id(i)
            )));
        }
        degree.push(d);
        let per = cells_per_arm(model, d);
        for a in [false, true] {
            for key in 0..per {
                let p = match model {
                    OutcomeModel::Stratified => stratified_probability(a, key, d, z[i]),
                    OutcomeModel::FullVector => {
                        let (mut same, mut diff) = (0.0, 0.0);
                        for (b, &j) in net.neighbors(i).iter().enumerate() {
                            if key >> b & 1 == 1 {
                                if z[i] == z[j] {
                                    same += 1.0;
                                } else {
                                    diff += 1.0;
                                }
                            }
                        }
                        let a = f64::from(u8::from(a));
                        let d = d as f64;
                        expit(-1.75 + 0.5 * a - 2.0 * same / d + 5.0 * diff / d + 0.5 * z[i])
                    }
                };
                cells.push(u8::from(rng.random::<f64>() < p));
            }
        }
        offsets.push(cells.len());
    }
    Ok(PotentialOutcomeTable {
        model,
        degree,
        offsets,
        cells,
    })
}

impl PotentialOutcomeTable {
    pub fn model(&self) -> OutcomeModel {
        self.model
    }

    pub fn n(&self) -> usize {
        self.degree.len()
    }

    /// `y_i(a, key)` where `key` is `s` (stratified) or the neighbor
    /// exposure bitmask in neighbor-list order (full vector).
    pub fn get(&self, i: usize, a: bool, key: usize) -> u8 {
        let per = cells_per_arm(self.model, self.degree[i]);
        self.cells[self.offsets[i] + usize::from(a) * per + key]
    }

    fn key(&self, net: &Network, exposure: &[bool], i: usize) -> usize {
        match self.model {
            OutcomeModel::Stratified => net.neighbors(i).iter().filter(|&&j| exposure[j]).count(),
            OutcomeModel::FullVector => net
                .neighbors(i)
                .iter()
                .enumerate()
                .filter(|(_, &j)| exposure[j])
                .map(|(b, _)| 1 << b)
                .sum(),
        }
    }

    /// Observed outcomes by consistency.
    pub fn observe(&self, net: &Network, exposure: &[bool]) -> Vec<f64> {
        (0..self.n())
            .map(|i| f64::from(self.get(i, exposure[i], self.key(net, exposure, i))))
            .collect()
    }

    /// `ȳ_i(a, α)` for one node.
    pub fn node_truth(&self, i: usize, a: bool, alpha: f64) -> f64 {
        let d = self.degree[i];
        let (la, lb) = (log(alpha), log1p(-alpha));
        match self.model {
            OutcomeModel::Stratified => (0..=d)
                .filter(|&s| self.get(i, a, s) == 1)
                .map(|s| libm::exp(ln_choose(d, s) + s as f64 * la + (d - s) as f64 * lb))
                .sum(),
            OutcomeModel::FullVector => (0..1usize << d)
                .filter(|&mask| self.get(i, a, mask) == 1)
                .map(|mask| {
                    let s = mask.count_ones() as usize;
                    libm::exp(s as f64 * la + (d - s) as f64 * lb)
                })
                .sum(),
        }
    }
}

/// `(ȳ(0,α), ȳ(1,α), ȳ(α))` for each α, in the stacked target order.
pub fn true_estimands(table: &PotentialOutcomeTable, alphas: &[f64]) -> Vec<f64> {
    let n = table.n() as f64;
    let mut out = Vec::with_capacity(3 * alphas.len());
    for &alpha in alphas {
        let y0: f64 = (0..table.n()).map(|i| table.node_truth(i, false, alpha)).sum::<f64>() / n;
        let y1: f64 = (0..table.n()).map(|i| table.node_truth(i, true, alpha)).sum::<f64>() / n;
        out.extend_from_slice(&[y0, y1, alpha * y1 + (1.0 - alpha) * y0]);
    }
    out
}
