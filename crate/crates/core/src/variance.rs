//! Sandwich covariance for the stacked estimating equations of the
//! propensity nuisance parameters and the potential-outcome targets, with
//! delta-method contrasts and Wald intervals.

use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;
use nalgebra::DMatrix;

use crate::data::Design;
use crate::error::{Error, Result};
use crate::estimator::{
    check_floor, component_average, contributions, Arm, EffectEstimate, EffectKind, EstimatorKind, WeightOptions,
};
use crate::graph::ComponentPartition;
use crate::linalg::{guarded_inverse, max_asymmetry};
use crate::math::normal_quantile;
use crate::policy::AllocationPolicy;
use crate::propensity::{NodeTerms, PropensityModel};

/// `θ = (Θ, then (θ₀α, θ₁α, θα) for each α in grid order)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    pub nuisance: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Three entries per α: unexposed, exposed, marginal.
    pub targets: Vec<f64>,
}

impl ThetaVector {
    pub fn len(&self) -> usize {
        self.nuisance.len() + self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of a target in the stacked vector.
    pub fn index(&self, arm: Arm, alpha_idx: usize) -> usize {
        self.nuisance.len() + 3 * alpha_idx + arm.offset()
    }

    pub fn target(&self, arm: Arm, alpha_idx: usize) -> f64 {
        self.targets[3 * alpha_idx + arm.offset()]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.nuisance.clone();
        v.extend_from_slice(&self.targets);
        v
    }

    /// `λ` for a contrast between grid entries `a1` and `a0`.
    pub fn selector(&self, kind: EffectKind, a1: usize, a0: usize) -> Vec<f64> {
        let (arm1, arm0) = kind.arms();
        let mut l = vec![0.0; self.len()];
        l[self.index(arm1, a1)] += 1.0;
        l[self.index(arm0, a0)] -= 1.0;
        l
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichCovariance {
    /// `(1/m) A⁻¹ B A⁻ᵀ`.
    pub sigma: DMatrix<f64>,
    pub bread: DMatrix<f64>,
    pub meat: DMatrix<f64>,
    pub m: usize,
    /// Largest `|Σ_ab − Σ_ba|` before symmetrization.
    pub raw_asymmetry: f64,
}

/// Per-arm, per-α node contributions at a fixed model evaluation.
fn all_contributions<M: PropensityModel>(
    model: &M,
    terms: &NodeTerms,
    design: &Design,
    alphas: &[AllocationPolicy],
    opts: &WeightOptions,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(3 * alphas.len());
    for &a in alphas {
        for arm in Arm::ALL {
            out.push(contributions(terms, model.numerator(), design, arm, a, opts));
        }
    }
    out
}

/// `Θ̂` from the model and the targets `Ŷ` at `Θ̂`.
pub fn estimate_theta<M: PropensityModel>(
    model: &M,
    design: &Design,
    partition: &ComponentPartition,
    alphas: &[AllocationPolicy],
    opts: &WeightOptions,
) -> Result<ThetaVector> {
    let terms = model.evaluate(design, false)?;
    check_floor(&terms, design, opts)?;
    let targets = all_contributions(model, &terms, design, alphas, opts)
        .iter()
        .map(|c| component_average(c, partition))
        .collect();
    Ok(ThetaVector {
        nuisance: model.nuisance(),
        alphas: alphas.iter().map(|a| a.alpha()).collect(),
        targets,
    })
}

/// Rows are components, columns are the stacked `ψ` coordinates.
fn psi_rows(
    terms: &NodeTerms,
    contribs: &[Vec<f64>],
    targets: &[f64],
    partition: &ComponentPartition,
) -> DMatrix<f64> {
    let p = terms.width;
    let q = p + contribs.len();
    let k = partition.mean_size();
    let mut psi = DMatrix::zeros(partition.m(), q);
    for (nu, part) in partition.parts().iter().enumerate() {
        for &i in part {
            for (c, s) in terms.score_row(i).iter().enumerate() {
                psi[(nu, c)] += s;
            }
            for (t, c) in contribs.iter().enumerate() {
                psi[(nu, p + t)] += c[i];
            }
        }
        for c in 0..q {
            psi[(nu, c)] /= k;
        }
        for (t, &theta) in targets.iter().enumerate() {
            psi[(nu, p + t)] -= theta;
        }
    }
    psi
}

/// Stacked `ψ_ν(θ)` for every component (row `ν`), with the nuisance
/// block evaluated at `model`'s parameters.
pub fn psi_matrix<M: PropensityModel>(
    model: &M,
    design: &Design,
    partition: &ComponentPartition,
    theta: &ThetaVector,
    opts: &WeightOptions,
) -> Result<DMatrix<f64>> {
    let alphas = policies(&theta.alphas)?;
    let terms = model.evaluate(design, true)?;
    let contribs = all_contributions(model, &terms, design, &alphas, opts);
    Ok(psi_rows(&terms, &contribs, &theta.targets, partition))
}

/// `ψ_ν(θ)` for one component.
pub fn psi_component<M: PropensityModel>(
    nu: usize,
    model: &M,
    design: &Design,
    partition: &ComponentPartition,
    theta: &ThetaVector,
    opts: &WeightOptions,
) -> Result<Vec<f64>> {
    let psi = psi_matrix(model, design, partition, theta, opts)?;
    Ok(psi.row(nu).iter().copied().collect())
}

fn policies(alphas: &[f64]) -> Result<Vec<AllocationPolicy>> {
    alphas.iter().map(|&a| AllocationPolicy::new(a)).collect()
}

/// Empirical sandwich `(1/m) A_m⁻¹ B_m A_m⁻ᵀ`.
///
/// The nuisance columns of `A_m` come from central differences of the
/// component-averaged `ψ` with step `1e-5·max(1, |θ_j|)`; the target block
/// of `∂ψ/∂θ` is exactly `−I`.
pub fn sandwich<M: PropensityModel>(
    model: &M,
    design: &Design,
    partition: &ComponentPartition,
    theta: &ThetaVector,
    opts: &WeightOptions,
) -> Result<SandwichCovariance> {
    let m = partition.m();
    if m < 2 {
        return Err(Error::TooFewComponents(m));
    }
    let mf = m as f64;
    let psi = psi_matrix(model, design, partition, theta, opts)?;
    let q = psi.ncols();
    let p = theta.nuisance.len();
    let meat = psi.transpose() * &psi / mf;

    let mut bread = DMatrix::<f64>::identity(q, q);
    let mut t = theta.nuisance.clone();
    for j in 0..p {
        let h = 1e-5 * theta.nuisance[j].abs().max(1.0);
        t[j] = theta.nuisance[j] + h;
        let plus = psi_matrix(&model.with_nuisance(&t), design, partition, theta, opts)?;
        t[j] = theta.nuisance[j] - h;
        let minus = psi_matrix(&model.with_nuisance(&t), design, partition, theta, opts)?;
        t[j] = theta.nuisance[j];
        for r in 0..q {
            let d = (plus.column(r).sum() - minus.column(r).sum()) / (2.0 * h);
            bread[(r, j)] = -d / mf;
        }
    }

    let inv = guarded_inverse(&bread)?;
    let raw = &inv * &meat * inv.transpose() / mf;
    let sigma = (&raw + raw.transpose()) * 0.5;
    Ok(SandwichCovariance {
        raw_asymmetry: max_asymmetry(&raw),
        sigma,
        bread,
        meat,
        m,
    })
}

/// `sqrt(λᵀ Σ̂ λ)`; tiny negative quadratic forms are clipped to zero.
pub fn contrast_se(cov: &SandwichCovariance, lambda: &[f64]) -> Result<f64> {
    let q = cov.sigma.nrows();
    if lambda.len() != q {
        return Err(Error::SelectorLength {
            got: lambda.len(),
            expected: q,
        });
    }
    let mut v = 0.0;
    for a in 0..q {
        if lambda[a] == 0.0 {
            continue;
        }
        for b in 0..q {
            v += lambda[a] * cov.sigma[(a, b)] * lambda[b];
        }
    }
    if v < -1e-8 {
        return Err(Error::NegativeVariance(v));
    }
    Ok(sqrt(v.max(0.0)))
}

/// `estimate ± z_{1−(1−level)/2} · se`.
pub fn wald_ci(estimate: f64, se: f64, level: f64) -> (f64, f64) {
    if se == 0.0 {
        return (estimate, estimate);
    }
    let z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    (estimate - z * se, estimate + z * se)
}

/// One requested contrast, by index into the α grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffectRequest {
    pub kind: EffectKind,
    pub alpha1: usize,
    pub alpha0: usize,
}

/// Direct effects at every α, then indirect, total, and overall effects
/// for every pair `α₁ > α₀` ordered by `(α₀, α₁)`. The grid is assumed
/// sorted ascending.
pub fn effect_grid(n_alpha: usize, kinds: &[EffectKind]) -> Vec<EffectRequest> {
    let mut out = Vec::new();
    for &kind in &EffectKind::ALL {
        if !kinds.contains(&kind) {
            continue;
        }
        if kind == EffectKind::Direct {
            out.extend((0..n_alpha).map(|a| EffectRequest {
                kind,
                alpha1: a,
                alpha0: a,
            }));
        } else {
            for a0 in 0..n_alpha {
                for a1 in a0 + 1..n_alpha {
                    out.push(EffectRequest {
                        kind,
                        alpha1: a1,
                        alpha0: a0,
                    });
                }
            }
        }
    }
    out
}

/// Point estimates, covariance, and the requested effect rows.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub theta: ThetaVector,
    pub covariance: SandwichCovariance,
    pub effects: Vec<EffectEstimate>,
}

impl Analysis {
    /// Standard error of one target coordinate.
    pub fn target_se(&self, arm: Arm, alpha_idx: usize) -> f64 {
        let i = self.theta.index(arm, alpha_idx);
        sqrt(self.covariance.sigma[(i, i)].max(0.0))
    }
}

/// Full pipeline after fitting: targets, sandwich, and contrasts.
#[allow(clippy::too_many_arguments)]
pub fn analyze<M: PropensityModel>(
    estimator: EstimatorKind,
    model: &M,
    design: &Design,
    partition: &ComponentPartition,
    alphas: &[AllocationPolicy],
    requests: &[EffectRequest],
    level: f64,
    opts: &WeightOptions,
) -> Result<Analysis> {
    let theta = estimate_theta(model, design, partition, alphas, opts)?;
    let covariance = sandwich(model, design, partition, &theta, opts)?;
    let mut effects = Vec::with_capacity(requests.len());
    for r in requests {
        let (arm1, arm0) = r.kind.arms();
        let estimate = theta.target(arm1, r.alpha1) - theta.target(arm0, r.alpha0);
        let se = contrast_se(&covariance, &theta.selector(r.kind, r.alpha1, r.alpha0))?;
        effects.push(EffectEstimate {
            estimator,
            kind: r.kind,
            alpha1: theta.alphas[r.alpha1],
            alpha0: theta.alphas[r.alpha0],
            estimate,
            se,
            ci: wald_ci(estimate, se, level),
        });
    }
    Ok(Analysis {
        theta,
        covariance,
        effects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wald_standard_normal() {
        let (lo, hi) = wald_ci(0.0, 1.0, 0.95);
        assert!((lo + 1.959964).abs() < 1e-6 && (hi - 1.959964).abs() < 1e-6);
        assert_eq!(wald_ci(0.3, 0.0, 0.95), (0.3, 0.3));
    }

    #[test]
    fn table_layout_has_22_rows() {
        let g = effect_grid(4, &EffectKind::ALL);
        assert_eq!(g.len(), 22);
        assert_eq!(g.iter().filter(|r| r.kind == EffectKind::Direct).count(), 4);
        assert_eq!(g.iter().filter(|r| r.kind == EffectKind::Indirect).count(), 6);
        assert!(g.iter().all(|r| r.kind == EffectKind::Direct || r.alpha1 > r.alpha0));
    }

    #[test]
    fn selector_shapes() {
        let t = ThetaVector {
            nuisance: vec![0.0; 2],
            alphas: vec![0.3, 0.5],
            targets: vec![0.0; 6],
        };
        assert_eq!(t.len(), 2 + 6);
        let l = t.selector(EffectKind::Indirect, 1, 0);
        assert_eq!(l, vec![0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let same = t.selector(EffectKind::Indirect, 1, 1);
        assert!(same.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_coordinate_se() {
        let sigma = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 9.0]);
        let cov = SandwichCovariance {
            sigma: sigma.clone(),
            bread: DMatrix::identity(2, 2),
            meat: sigma,
            m: 2,
            raw_asymmetry: 0.0,
        };
        assert_eq!(contrast_se(&cov, &[0.0, 1.0]).unwrap(), 3.0);
        assert!((contrast_se(&cov, &[1.0, -1.0]).unwrap() - sqrt(11.0)).abs() < 1e-15);
        assert!(matches!(contrast_se(&cov, &[1.0]), Err(Error::SelectorLength { .. })));
    }
}
