//! Gauss–Hermite rules for integrating against a centered normal density.

use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, fabs, log, sqrt};

use crate::math::LN_PI;

pub const DEFAULT_NODES: usize = 25;

/// Physicists' Gauss–Hermite rule: `∫ f(x) e^{-x²} dx ≈ Σ w_k f(x_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds an `n`-point rule by Newton iteration on the orthonormal
    /// Hermite recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let pim4 = exp(-0.25 * LN_PI);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..m {
            z = match i {
                0 => sqrt(2.0 * nf + 1.0) - 1.85575 * libm::pow(2.0 * nf + 1.0, -0.16667),
                1 => z - 1.14 * libm::pow(nf, 0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * sqrt(2.0 / (jf + 1.0)) * p2 - sqrt(jf / (jf + 1.0)) * p3;
                }
                pp = sqrt(2.0 * nf) * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if fabs(z - z1) <= 1e-15 * fabs(z).max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[m - 1] = 0.0;
        }
        // Ascending order.
        nodes.reverse();
        weights.reverse();
        let log_weights = weights.iter().map(|w| log(*w)).collect();
        Self {
            nodes,
            weights,
            log_weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln w_k − ½ ln π`, the log-weights for an expectation under N(0, ψ).
    pub fn normal_log_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_weights.iter().map(|lw| lw - 0.5 * LN_PI)
    }

    /// Abscissae `b_k = √(2ψ)·x_k` for an expectation under N(0, ψ).
    pub fn normal_abscissae(&self, variance: f64) -> impl Iterator<Item = f64> + '_ {
        let scale = sqrt(2.0 * variance.max(0.0));
        self.nodes.iter().map(move |x| scale * x)
    }

    /// `E[f(b)]` for `b ~ N(0, variance)`.
    pub fn expect_normal(&self, variance: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let scale = sqrt(2.0 * variance.max(0.0));
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(scale * x))
            .sum();
        s * exp(-0.5 * LN_PI)
    }
}

impl Default for GaussHermite {
    fn default() -> Self {
        Self::new(DEFAULT_NODES)
    }
}
