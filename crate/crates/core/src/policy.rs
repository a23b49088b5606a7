//! Bernoulli allocation strategies: the counterfactual coverage `α` at which
//! an individual and each of their neighbors receive the intervention.

use libm::{exp, log, log1p};

use crate::error::{Error, Result};
use crate::math::ln_choose;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AllocationPolicy(f64);

impl AllocationPolicy {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }

    /// `ln α^s (1−α)^{d−s}`.
    fn ln_vector(self, exposed: usize, degree: usize) -> f64 {
        exposed as f64 * log(self.0) + (degree - exposed) as f64 * log1p(-self.0)
    }
}

fn check(exposed: usize, degree: usize) -> Result<()> {
    if exposed > degree {
        Err(Error::CountExceedsDegree {
            count: exposed,
            degree,
        })
    } else {
        Ok(())
    }
}

/// Probability of one specific neighbor exposure vector with `exposed` ones
/// out of `degree`: `α^s (1−α)^{d−s}`.
pub fn pi_vector(exposed: usize, degree: usize, policy: AllocationPolicy) -> Result<f64> {
    check(exposed, degree)?;
    Ok(exp(policy.ln_vector(exposed, degree)))
}

/// `α` if exposed, `1 − α` otherwise.
pub fn pi_individual(exposed: bool, policy: AllocationPolicy) -> f64 {
    if exposed {
        policy.0
    } else {
        1.0 - policy.0
    }
}

/// Binomial probability of `exposed` exposed neighbors out of `degree`.
pub fn pi_count(exposed: usize, degree: usize, policy: AllocationPolicy) -> Result<f64> {
    check(exposed, degree)?;
    Ok(exp(ln_choose(degree, exposed) + policy.ln_vector(exposed, degree)))
}

/// `π(S_i; α) · π(A_i; α)`.
pub fn pi_joint(exposed_self: bool, exposed: usize, degree: usize, policy: AllocationPolicy) -> Result<f64> {
    Ok(pi_count(exposed, degree, policy)? * pi_individual(exposed_self, policy))
}
