//! Propensity-score models for the joint (own, neighborhood) exposure.
//!
//! Every model evaluates, for each node, `ln f(A_i, A_{N_i} | Z)` together
//! with the exposure count and trial count that enter the counterfactual
//! numerator, and optionally the node's score `∂ ln f / ∂Θ`.

use alloc::vec::Vec;

use crate::data::Design;
use crate::error::Result;

mod baseline;
mod glm;
mod grouped;
mod ipw1;
mod ipw2;
mod known;

pub use baseline::{fit_component_propensity, ComponentPropensityFit};
pub use ipw1::{eval_f1, fit_ipw1, Ipw1Fit, Ipw1Options};
pub use ipw2::{eval_f2, fit_ipw2, Ipw2Fit};
pub use known::KnownPropensity;

/// Form of the counterfactual numerator `π(·; α)` paired with a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Numerator {
    /// `α^s (1−α)^{d−s}`: probability of the specific neighbor vector.
    Vector,
    /// `C(d, s) α^s (1−α)^{d−s}`: probability of the exposed count.
    Count,
}

/// Per-node evaluation of a propensity model.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTerms {
    pub log_f: Vec<f64>,
    /// Exposed count `s` and trial count `d` for the numerator.
    pub counts: Vec<(usize, usize)>,
    /// Row-major `n × width` node scores; empty unless requested.
    pub score: Vec<f64>,
    pub width: usize,
}

impl NodeTerms {
    pub fn score_row(&self, i: usize) -> &[f64] {
        &self.score[i * self.width..(i + 1) * self.width]
    }
}

pub trait PropensityModel: Clone + Send + Sync {
    fn numerator(&self) -> Numerator;

    /// Nuisance parameters `Θ` in the coordinates used for the sandwich.
    fn nuisance(&self) -> Vec<f64>;

    /// Same model with `Θ` replaced.
    fn with_nuisance(&self, theta: &[f64]) -> Self;

    fn evaluate(&self, design: &Design, with_score: bool) -> Result<NodeTerms>;
}

/// Node scores by central finite differences of `ln f`, step
/// `1e-5·max(1, |η|)`. Used to cross-check the analytic scores.
pub fn finite_difference_scores<M: PropensityModel>(model: &M, design: &Design) -> Result<NodeTerms> {
    let theta = model.nuisance();
    let p = theta.len();
    let mut base = model.evaluate(design, false)?;
    let n = base.log_f.len();
    let mut score = alloc::vec![0.0; n * p];
    let mut t = theta.clone();
    for j in 0..p {
        let h = 1e-5 * theta[j].abs().max(1.0);
        t[j] = theta[j] + h;
        let plus = model.with_nuisance(&t).evaluate(design, false)?;
        t[j] = theta[j] - h;
        let minus = model.with_nuisance(&t).evaluate(design, false)?;
        t[j] = theta[j];
        for i in 0..n {
            score[i * p + j] = (plus.log_f[i] - minus.log_f[i]) / (2.0 * h);
        }
    }
    base.score = score;
    base.width = p;
    Ok(base)
}
