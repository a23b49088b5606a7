//! Inverse-probability-weighted population-average potential outcomes and
//! the effect contrasts built from them.

use alloc::vec::Vec;
use libm::{exp, log, log1p};

use crate::data::Design;
use crate::error::{Error, Result};
use crate::graph::ComponentPartition;
use crate::math::ln_choose;
use crate::policy::AllocationPolicy;
use crate::propensity::{NodeTerms, Numerator, PropensityModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Ipw1,
    Ipw2,
    /// Component-level propensity (partial-interference comparison).
    Component,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [Self::Ipw1, Self::Ipw2, Self::Component];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ipw1 => "ipw1",
            Self::Ipw2 => "ipw2",
            Self::Component => "component",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    Unexposed,
    Exposed,
    Marginal,
}

impl Arm {
    pub const ALL: [Arm; 3] = [Arm::Unexposed, Arm::Exposed, Arm::Marginal];

    /// Position within the per-α target triple.
    pub fn offset(self) -> usize {
        match self {
            Self::Unexposed => 0,
            Self::Exposed => 1,
            Self::Marginal => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialOutcomeEstimate {
    pub estimator: EstimatorKind,
    pub arm: Arm,
    pub alpha: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EffectKind {
    Direct,
    Indirect,
    Total,
    Overall,
}

impl EffectKind {
    pub const ALL: [EffectKind; 4] = [Self::Direct, Self::Indirect, Self::Total, Self::Overall];

    pub fn name(self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Indirect => "indirect",
            Self::Total => "total",
            Self::Overall => "overall",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Arms of the minuend (at `α₁`) and subtrahend (at `α₀`).
    pub fn arms(self) -> (Arm, Arm) {
        match self {
            Self::Direct => (Arm::Exposed, Arm::Unexposed),
            Self::Indirect => (Arm::Unexposed, Arm::Unexposed),
            Self::Total => (Arm::Exposed, Arm::Unexposed),
            Self::Overall => (Arm::Marginal, Arm::Marginal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectEstimate {
    pub estimator: EstimatorKind,
    pub kind: EffectKind,
    pub alpha1: f64,
    pub alpha0: f64,
    pub estimate: f64,
    pub se: f64,
    pub ci: (f64, f64),
}

/// Positivity handling for `π/f` weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightOptions {
    /// Propensities below this are an error unless truncation is enabled.
    pub floor: f64,
    /// Clip weights above this quantile of the arm's weights.
    pub truncate_quantile: Option<f64>,
}

impl Default for WeightOptions {
    fn default() -> Self {
        Self {
            floor: 1e-10,
            truncate_quantile: None,
        }
    }
}

/// Checks every node's propensity against the floor.
pub fn check_floor(terms: &NodeTerms, design: &Design, opts: &WeightOptions) -> Result<()> {
    if opts.truncate_quantile.is_some() {
        return Ok(());
    }
    let ln_floor = log(opts.floor);
    for (i, &lf) in terms.log_f.iter().enumerate() {
        if !(lf >= ln_floor) {
            return Err(Error::WeightFloor {
                node: design.id(i).into(),
                value: exp(lf),
                floor: opts.floor,
            });
        }
    }
    Ok(())
}

/// `ln π(A_{N_i}; α)` in the model's numerator form.
fn ln_numerator(form: Numerator, s: usize, d: usize, alpha: f64) -> f64 {
    let v = s as f64 * log(alpha) + (d - s) as f64 * log1p(-alpha);
    match form {
        Numerator::Vector => v,
        Numerator::Count => v + ln_choose(d, s),
    }
}

/// Per-node contributions `Y_i · I(A_i = a) · π / f` (times `π(A_i; α)` for
/// the marginal arm). Their sum over a component, divided by `k`, is the
/// component's term in the estimator.
pub fn contributions(
    terms: &NodeTerms,
    form: Numerator,
    design: &Design,
    arm: Arm,
    policy: AllocationPolicy,
    opts: &WeightOptions,
) -> Vec<f64> {
    let alpha = policy.alpha();
    let a = design.exposure();
    let y = design.outcome();
    let mut weights: Vec<f64> = (0..design.n())
        .map(|i| {
            let take = match arm {
                Arm::Unexposed => !a[i],
                Arm::Exposed => a[i],
                Arm::Marginal => true,
            };
            if !take {
                return 0.0;
            }
            let (s, d) = terms.counts[i];
            let mut ln_w = ln_numerator(form, s, d, alpha) - terms.log_f[i];
            if arm == Arm::Marginal {
                ln_w += if a[i] { log(alpha) } else { log1p(-alpha) };
            }
            exp(ln_w)
        })
        .collect();
    if let Some(q) = opts.truncate_quantile {
        let mut active: Vec<f64> = weights.iter().copied().filter(|&w| w > 0.0).collect();
        if !active.is_empty() {
            active.sort_by(f64::total_cmp);
            let idx = (libm::round(q * (active.len() - 1) as f64) as usize).min(active.len() - 1);
            let cap = active[idx];
            for w in &mut weights {
                *w = w.min(cap);
            }
        }
    }
    weights.iter().zip(y).map(|(w, y)| w * y).collect()
}

/// `(1/m) Σ_ν (1/k) Σ_{i ∈ C_ν} c_i` with `k = n/m`, summed
/// per component in component order.
pub fn component_average(values: &[f64], partition: &ComponentPartition) -> f64 {
    let k = partition.mean_size();
    let m = partition.m() as f64;
    partition
        .parts()
        .iter()
        .map(|part| part.iter().map(|&i| values[i]).sum::<f64>() / k)
        .sum::<f64>()
        / m
}

/// `Ŷ(a, α)` or `Ŷ(α)` for an already evaluated model.
pub fn y_hat_from_terms(
    estimator: EstimatorKind,
    terms: &NodeTerms,
    form: Numerator,
    design: &Design,
    partition: &ComponentPartition,
    arm: Arm,
    policy: AllocationPolicy,
    opts: &WeightOptions,
) -> Result<PotentialOutcomeEstimate> {
    check_floor(terms, design, opts)?;
    let c = contributions(terms, form, design, arm, policy, opts);
    Ok(PotentialOutcomeEstimate {
        estimator,
        arm,
        alpha: policy.alpha(),
        value: component_average(&c, partition),
    })
}

pub fn y_hat<M: PropensityModel>(
    estimator: EstimatorKind,
    model: &M,
    design: &Design,
    partition: &ComponentPartition,
    arm: Arm,
    policy: AllocationPolicy,
    opts: &WeightOptions,
) -> Result<PotentialOutcomeEstimate> {
    let terms = model.evaluate(design, false)?;
    y_hat_from_terms(estimator, &terms, model.numerator(), design, partition, arm, policy, opts)
}

/// Difference `lhs − rhs` after checking that the operands match the
/// contrast. Standard error and interval are left at zero / the point.
pub fn effect(
    kind: EffectKind,
    lhs: &PotentialOutcomeEstimate,
    rhs: &PotentialOutcomeEstimate,
) -> Result<EffectEstimate> {
    let (arm1, arm0) = kind.arms();
    if lhs.arm != arm1 || rhs.arm != arm0 {
        return Err(Error::MismatchedContrast("operand arms do not match the effect"));
    }
    if lhs.estimator != rhs.estimator {
        return Err(Error::MismatchedContrast("operands come from different estimators"));
    }
    if kind == EffectKind::Direct && lhs.alpha != rhs.alpha {
        return Err(Error::MismatchedContrast("direct effect compares arms at one coverage"));
    }
    let estimate = lhs.value - rhs.value;
    Ok(EffectEstimate {
        estimator: lhs.estimator,
        kind,
        alpha1: lhs.alpha,
        alpha0: rhs.alpha,
        estimate,
        se: 0.0,
        ci: (estimate, estimate),
    })
}
