use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use libm::{log, log1p};

use super::{NodeTerms, Numerator, PropensityModel};
use crate::data::Design;
use crate::error::Result;

/// Exposures drawn independently with known probabilities `p_i`. No
/// nuisance parameters.
///
/// With [`Numerator::Vector`] the propensity is the probability of the
/// closed-neighborhood exposure vector; with [`Numerator::Count`] it is
/// `P(A_i) · P(S_i)` with `S_i` Poisson-binomial.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownPropensity {
    p: Arc<Vec<f64>>,
    numerator: Numerator,
}

impl KnownPropensity {
    pub fn new(p: Vec<f64>, numerator: Numerator) -> Self {
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0), "probabilities must lie in (0, 1)");
        Self {
            p: Arc::new(p),
            numerator,
        }
    }

    fn ln_bernoulli(&self, j: usize, a: bool) -> f64 {
        if a {
            log(self.p[j])
        } else {
            log1p(-self.p[j])
        }
    }
}

/// `P(Σ B_j = s)` for independent `B_j ~ Bern(p_j)`.
fn poisson_binomial(p: impl Iterator<Item = f64>, s: usize) -> f64 {
    let mut dist = vec![1.0];
    for pj in p {
        let mut next = vec![0.0; dist.len() + 1];
        for (k, &v) in dist.iter().enumerate() {
            next[k] += v * (1.0 - pj);
            next[k + 1] += v * pj;
        }
        dist = next;
    }
    dist.get(s).copied().unwrap_or(0.0)
}

impl PropensityModel for KnownPropensity {
    fn numerator(&self) -> Numerator {
        self.numerator
    }

    fn nuisance(&self) -> Vec<f64> {
        Vec::new()
    }

    fn with_nuisance(&self, _theta: &[f64]) -> Self {
        self.clone()
    }

    fn evaluate(&self, design: &Design, _with_score: bool) -> Result<NodeTerms> {
        let a = design.exposure();
        let n = design.n();
        let mut log_f = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        for i in 0..n {
            let s = design.exposed_neighbors(i);
            let hood = design.closed_neighborhood(i);
            let lf = match self.numerator {
                Numerator::Vector => hood.iter().map(|&j| self.ln_bernoulli(j, a[j])).sum(),
                Numerator::Count => {
                    self.ln_bernoulli(i, a[i]) + log(poisson_binomial(hood[1..].iter().map(|&j| self.p[j]), s))
                }
            };
            log_f.push(lf);
            counts.push((s, design.degree(i)));
        }
        Ok(NodeTerms {
            log_f,
            counts,
            score: Vec::new(),
            width: 0,
        })
    }
}
