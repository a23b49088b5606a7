//! Binomial logistic regression, `s_r ~ Bin(t_r, expit(x_r·β))`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::design_rank;
use crate::math::{expit, log_expit};
use crate::optim::{minimize, Objective, OptimOptions};

pub(crate) const PROBABILITY_FLOOR: f64 = 1e-10;

pub(crate) struct BinomialLogit<'a> {
    pub rows: &'a [f64],
    pub width: usize,
    pub successes: &'a [f64],
    pub trials: &'a [f64],
}

impl Objective for BinomialLogit<'_> {
    fn dim(&self) -> usize {
        self.width
    }

    fn eval(&self, beta: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        let mut nll = 0.0;
        for (r, x) in self.rows.chunks_exact(self.width).enumerate() {
            let (s, t) = (self.successes[r], self.trials[r]);
            let eta: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
            nll -= s * log_expit(eta) + (t - s) * log_expit(-eta);
            let resid = s - t * expit(eta);
            for (g, xv) in grad.iter_mut().zip(x) {
                *g -= resid * xv;
            }
        }
        nll
    }
}

/// Maximum-likelihood fit with rank, constant-response, and fitted
/// probability separation checks.
pub(crate) fn fit(model: &'static str, glm: &BinomialLogit<'_>, opts: OptimOptions) -> Result<Vec<f64>> {
    let rank = design_rank(glm.rows, glm.width);
    if rank < glm.width {
        return Err(Error::RankDeficient {
            model,
            rank,
            cols: glm.width,
        });
    }
    let all_fail = glm.successes.iter().all(|&s| s == 0.0);
    let all_succeed = glm.successes.iter().zip(glm.trials).all(|(s, t)| s == t);
    if all_fail || all_succeed {
        return Err(Error::Separation { model });
    }
    let r = minimize(glm, &vec![0.0; glm.width], opts);
    if !r.converged {
        let grad_norm = r.grad_norm();
        return Err(Error::NoConvergence {
            model,
            iterations: r.iterations,
            grad_norm,
            last: r.x,
        });
    }
    for (x, &t) in glm.rows.chunks_exact(glm.width).zip(glm.trials) {
        if t == 0.0 {
            continue;
        }
        let p = expit(x.iter().zip(&r.x).map(|(a, b)| a * b).sum());
        if !(PROBABILITY_FLOOR..=1.0 - PROBABILITY_FLOOR).contains(&p) {
            return Err(Error::Separation { model });
        }
    }
    Ok(r.x)
}
