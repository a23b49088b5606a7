use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal};

use crate::graph::ComponentPartition;
use crate::math::expit;

/// Exposure-generating mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExposureMechanism {
    /// `logit⁻¹(0.7 − 1.4Z + b_ν)`, `b_ν ~ N(0, 0.5²)`.
    RandomEffect,
    /// `logit⁻¹(0.7 − 1.4Z)`.
    NoRandomEffect,
    /// `logit⁻¹(−0.5 − 1.5Z + b_ν)`.
    Shifted,
    /// `logit⁻¹(−1.4Z₁ + 2Z₂ − 1.5Z₃ + 1.2Z₄)`.
    FourCovariate,
}

pub const RANDOM_EFFECT_SD: f64 = 0.5;

impl ExposureMechanism {
    fn has_random_effect(self) -> bool {
        matches!(self, Self::RandomEffect | Self::Shifted)
    }

    /// Linear predictor without the random effect.
    pub fn fixed_part(self, z: &[f64]) -> f64 {
        match self {
            Self::RandomEffect | Self::NoRandomEffect => 0.7 - 1.4 * z[0],
            Self::Shifted => -0.5 - 1.5 * z[0],
            Self::FourCovariate => -1.4 * z[0] + 2.0 * z[1] - 1.5 * z[2] + 1.2 * z[3],
        }
    }
}

/// Draws `A_i`, sharing one random intercept per part of `partition`.
pub fn gen_exposures<R: Rng + ?Sized>(
    covariates: &[Vec<f64>],
    partition: &ComponentPartition,
    mechanism: ExposureMechanism,
    rng: &mut R,
) -> Vec<bool> {
    let normal = Normal::new(0.0, RANDOM_EFFECT_SD).expect("valid sd");
    let mut exposure = alloc::vec![false; covariates.len()];
    for part in partition.parts() {
        let b = if mechanism.has_random_effect() { normal.sample(rng) } else { 0.0 };
        for &i in part {
            let p = expit(mechanism.fixed_part(&covariates[i]) + b);
            exposure[i] = Bernoulli::new(p).expect("probability in [0, 1]").sample(rng);
        }
    }
    exposure
}

/// Covariate designs used by the scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariateKind {
    /// `Z ~ Bern(0.5)`.
    Binary,
    /// `Z₁, Z₂ ~ Bern(0.5)`, `Z₃ ~ N(1, 0.5²)`, `Z₄ ~ N(0, 1)`.
    Four,
}

pub fn gen_covariates<R: Rng + ?Sized>(n: usize, kind: CovariateKind, rng: &mut R) -> Vec<Vec<f64>> {
    let coin = Bernoulli::new(0.5).expect("valid");
    let flip = |rng: &mut R| f64::from(u8::from(coin.sample(rng)));
    match kind {
        CovariateKind::Binary => (0..n).map(|_| alloc::vec![flip(rng)]).collect(),
        CovariateKind::Four => {
            let z3 = Normal::new(1.0, 0.5).expect("valid");
            let z4 = Normal::new(0.0, 1.0).expect("valid");
            (0..n)
                .map(|_| alloc::vec![flip(rng), flip(rng), z3.sample(rng), z4.sample(rng)])
                .collect()
        }
    }
}
