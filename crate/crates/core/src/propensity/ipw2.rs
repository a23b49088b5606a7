use alloc::vec::Vec;
use libm::exp;

use super::glm::{self, BinomialLogit};
use super::{NodeTerms, Numerator, PropensityModel};
use crate::data::{Aggregator, Design};
use crate::error::{Error, Result};
use crate::math::{expit, ln_choose, log_expit};
use crate::optim::OptimOptions;

/// Factorized propensity `f₂ = f₂₁(S_i | A_i, h(Z_{N_i})) · f₂₂(A_i | Z_i)`:
/// a binomial logistic model for the exposed-neighbor count and a Bernoulli
/// logistic model for the individual.
#[derive(Debug, Clone, PartialEq)]
pub struct Ipw2Fit {
    /// Individual model coefficients on `[1, Z_i]`.
    pub gamma: Vec<f64>,
    /// Coefficient on `A_i` in the neighbor model.
    pub beta: f64,
    /// Neighbor model coefficients on `[1, h(Z_{N_i})]`.
    pub delta: Vec<f64>,
    pub aggregator: Aggregator,
}

impl Ipw2Fit {
    /// Neighbor-model success probability `p₁` for node `i`.
    pub fn p_neighbor(&self, design: &Design, i: usize) -> f64 {
        expit(self.neighbor_eta(design, i))
    }

    /// Individual-model probability `p₂` for node `i`.
    pub fn p_individual(&self, design: &Design, i: usize) -> f64 {
        expit(self.individual_eta(design, i))
    }

    fn individual_eta(&self, design: &Design, i: usize) -> f64 {
        design.x(i).iter().zip(&self.gamma).map(|(a, b)| a * b).sum()
    }

    fn neighbor_eta(&self, design: &Design, i: usize) -> f64 {
        let a = f64::from(u8::from(design.exposure()[i]));
        a * self.beta + design.h(i).iter().zip(&self.delta).map(|(x, d)| x * d).sum::<f64>()
    }

    fn log_f2(&self, design: &Design, i: usize) -> f64 {
        let (s, d) = (design.exposed_neighbors(i), design.degree(i));
        let e1 = self.neighbor_eta(design, i);
        let e2 = self.individual_eta(design, i);
        let own = if design.exposure()[i] { log_expit(e2) } else { log_expit(-e2) };
        ln_choose(d, s) + s as f64 * log_expit(e1) + (d - s) as f64 * log_expit(-e1) + own
    }
}

/// Two independent maximum-likelihood fits. The aggregator must be the one
/// the design was built with.
pub fn fit_ipw2(design: &Design, aggregator: Aggregator, opts: OptimOptions) -> Result<Ipw2Fit> {
    let n = design.n();
    let k = design.x_width();
    let x: Vec<f64> = (0..n).flat_map(|i| design.x(i).iter().copied()).collect();
    let a: Vec<f64> = design.exposure().iter().map(|&v| f64::from(u8::from(v))).collect();
    let ones = alloc::vec![1.0; n];
    let gamma = glm::fit(
        "ipw2-individual",
        &BinomialLogit {
            rows: &x,
            width: k,
            successes: &a,
            trials: &ones,
        },
        opts,
    )?;

    let hw = design.h_width();
    let mut rows = Vec::with_capacity(n * (hw + 1));
    for i in 0..n {
        rows.push(a[i]);
        rows.extend_from_slice(design.h(i));
    }
    let s: Vec<f64> = (0..n).map(|i| design.exposed_neighbors(i) as f64).collect();
    let d: Vec<f64> = (0..n).map(|i| design.degree(i) as f64).collect();
    let coef = glm::fit(
        "ipw2-neighbor",
        &BinomialLogit {
            rows: &rows,
            width: hw + 1,
            successes: &s,
            trials: &d,
        },
        opts,
    )?;
    Ok(Ipw2Fit {
        gamma,
        beta: coef[0],
        delta: coef[1..].to_vec(),
        aggregator,
    })
}

/// `f₂` for node `i`:
/// `C(d,S) p₁^S (1−p₁)^{d−S} · p₂^A (1−p₂)^{1−A}`.
pub fn eval_f2(fit: &Ipw2Fit, design: &Design, i: usize) -> Result<f64> {
    if design.degree(i) == 0 {
        return Err(Error::Isolate {
            node: design.id(i).into(),
        });
    }
    Ok(exp(fit.log_f2(design, i)))
}

impl PropensityModel for Ipw2Fit {
    fn numerator(&self) -> Numerator {
        Numerator::Count
    }

    /// `[γ…, β, δ…]`.
    fn nuisance(&self) -> Vec<f64> {
        let mut t = self.gamma.clone();
        t.push(self.beta);
        t.extend_from_slice(&self.delta);
        t
    }

    fn with_nuisance(&self, theta: &[f64]) -> Self {
        let k = self.gamma.len();
        Self {
            gamma: theta[..k].to_vec(),
            beta: theta[k],
            delta: theta[k + 1..].to_vec(),
            aggregator: self.aggregator,
        }
    }

    fn evaluate(&self, design: &Design, with_score: bool) -> Result<NodeTerms> {
        let n = design.n();
        let k = self.gamma.len();
        let width = k + 1 + self.delta.len();
        let mut log_f = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        let mut score = Vec::with_capacity(if with_score { n * width } else { 0 });
        for i in 0..n {
            let (s, d) = (design.exposed_neighbors(i), design.degree(i));
            log_f.push(self.log_f2(design, i));
            counts.push((s, d));
            if with_score {
                let a = f64::from(u8::from(design.exposure()[i]));
                let r2 = a - self.p_individual(design, i);
                score.extend(design.x(i).iter().map(|x| r2 * x));
                let r1 = s as f64 - d as f64 * self.p_neighbor(design, i);
                score.push(r1 * a);
                score.extend(design.h(i).iter().map(|h| r1 * h));
            }
        }
        Ok(NodeTerms {
            log_f,
            counts,
            score,
            width,
        })
    }
}
