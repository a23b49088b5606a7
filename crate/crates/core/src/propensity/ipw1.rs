use alloc::sync::Arc;
use alloc::vec::Vec;
use libm::exp;

use super::grouped::{fit_grouped, RandomIntercept, Sets};
use super::{NodeTerms, Numerator, PropensityModel};
use crate::data::Design;
use crate::error::{Error, Result};
use crate::optim::OptimOptions;
use crate::quadrature::{GaussHermite, DEFAULT_NODES};

#[derive(Debug, Clone, Copy)]
pub struct Ipw1Options {
    pub quadrature_nodes: usize,
    /// Hold `ψ = 0`, which reduces the fit to logistic regression.
    pub fix_psi_zero: bool,
    /// Fitted variances below this are treated as zero.
    pub psi_boundary: f64,
    pub optim: OptimOptions,
}

impl Default for Ipw1Options {
    fn default() -> Self {
        Self {
            quadrature_nodes: DEFAULT_NODES,
            fix_psi_zero: false,
            psi_boundary: 1e-6,
            optim: OptimOptions::default(),
        }
    }
}

/// Mixed-effects logistic propensity over closed neighborhoods:
/// `f₁(A_i, A_{N_i}) = ∫ ∏_{j ∈ N_i*} p_j^{A_j}(1−p_j)^{1−A_j} φ(b; 0, ψ) db`
/// with `logit p_j = [1, Z_j]·γ + b`.
#[derive(Debug, Clone)]
pub struct Ipw1Fit {
    model: RandomIntercept,
    pub loglik: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl Ipw1Fit {
    /// A model at given parameters (no fitting). `ψ = 0` fixes the variance.
    pub fn from_parameters(gamma: Vec<f64>, psi: f64, quadrature_nodes: usize) -> Self {
        Self {
            model: RandomIntercept {
                gamma,
                psi,
                psi_free: psi > 0.0,
                rule: Arc::new(GaussHermite::new(quadrature_nodes)),
            },
            loglik: f64::NAN,
            iterations: 0,
            grad_norm: f64::NAN,
        }
    }

    pub fn gamma(&self) -> &[f64] {
        &self.model.gamma
    }

    pub fn psi(&self) -> f64 {
        self.model.psi
    }

    /// Whether `ψ` was estimated (false when fixed or at the boundary).
    pub fn psi_free(&self) -> bool {
        self.model.psi_free
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.model.rule.len()
    }
}

/// Maximizes the composite likelihood `Σ_i ln f₁(A_i, A_{N_i})`, one
/// latent intercept per closed neighborhood.
pub fn fit_ipw1(design: &Design, opts: &Ipw1Options) -> Result<Ipw1Fit> {
    let sets = Sets::closed_neighborhoods(design);
    let fit = fit_grouped(
        "ipw1",
        design,
        &sets,
        opts.quadrature_nodes,
        opts.fix_psi_zero,
        opts.psi_boundary,
        opts.optim,
    )?;
    Ok(Ipw1Fit {
        model: fit.model,
        loglik: fit.loglik,
        iterations: fit.iterations,
        grad_norm: fit.grad_norm,
    })
}

/// `f₁` for node `i`.
pub fn eval_f1(fit: &Ipw1Fit, design: &Design, i: usize) -> Result<f64> {
    if design.degree(i) == 0 {
        return Err(Error::Isolate {
            node: design.id(i).into(),
        });
    }
    let tables = fit.model.tables(design, &fit.model.linear_predictors(design));
    Ok(exp(fit.model.set_loglik(design, &tables, design.closed_neighborhood(i), None)))
}

impl PropensityModel for Ipw1Fit {
    fn numerator(&self) -> Numerator {
        Numerator::Vector
    }

    fn nuisance(&self) -> Vec<f64> {
        self.model.theta()
    }

    fn with_nuisance(&self, theta: &[f64]) -> Self {
        Self {
            model: self.model.with_theta(theta),
            ..self.clone()
        }
    }

    fn evaluate(&self, design: &Design, with_score: bool) -> Result<NodeTerms> {
        let n = design.n();
        let width = self.model.width();
        let tables = self.model.tables(design, &self.model.linear_predictors(design));
        let mut log_f = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        let mut score = if with_score { alloc::vec![0.0; n * width] } else { Vec::new() };
        for i in 0..n {
            let set = design.closed_neighborhood(i);
            let grad = with_score.then(|| &mut score[i * width..(i + 1) * width]);
            log_f.push(self.model.set_loglik(design, &tables, set, grad));
            counts.push((design.exposed_neighbors(i), design.degree(i)));
        }
        Ok(NodeTerms {
            log_f,
            counts,
            score,
            width,
        })
    }
}
