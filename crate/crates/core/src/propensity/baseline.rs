//! Component-level propensity for the partial-interference comparison: a
//! random-intercept logistic model for the whole component's exposure
//! vector, `f(A_ν | Z_ν)`. Each member's counterfactual numerator covers the
//! other members of its component.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::grouped::{fit_grouped, RandomIntercept, Sets};
use super::{Ipw1Options, NodeTerms, Numerator, PropensityModel};
use crate::data::Design;
use crate::error::Result;
use crate::graph::ComponentPartition;

#[derive(Debug, Clone)]
pub struct ComponentPropensityFit {
    model: RandomIntercept,
    sets: Arc<Sets>,
    pub loglik: f64,
}

impl ComponentPropensityFit {
    pub fn gamma(&self) -> &[f64] {
        &self.model.gamma
    }

    pub fn psi(&self) -> f64 {
        self.model.psi
    }
}

pub fn fit_component_propensity(
    design: &Design,
    partition: &ComponentPartition,
    opts: &Ipw1Options,
) -> Result<ComponentPropensityFit> {
    let sets = Sets::from_lists(partition.parts().iter().map(|p| p.as_slice()));
    let fit = fit_grouped(
        "component",
        design,
        &sets,
        opts.quadrature_nodes,
        opts.fix_psi_zero,
        opts.psi_boundary,
        opts.optim,
    )?;
    Ok(ComponentPropensityFit {
        model: fit.model,
        sets: Arc::new(sets),
        loglik: fit.loglik,
    })
}

impl PropensityModel for ComponentPropensityFit {
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

    /// The component score is split evenly over its members so that
    /// per-component sums recover it.
    fn evaluate(&self, design: &Design, with_score: bool) -> Result<NodeTerms> {
        let n = design.n();
        let width = self.model.width();
        let tables = self.model.tables(design, &self.model.linear_predictors(design));
        let mut log_f = alloc::vec![0.0; n];
        let mut counts = alloc::vec![(0, 0); n];
        let mut score = if with_score { alloc::vec![0.0; n * width] } else { Vec::new() };
        let mut grad = alloc::vec![0.0; width];
        for s in 0..self.sets.len() {
            let set = self.sets.get(s);
            grad.fill(0.0);
            let ll = self
                .model
                .set_loglik(design, &tables, set, with_score.then_some(grad.as_mut_slice()));
            let exposed = set.iter().filter(|&&j| design.exposure()[j]).count();
            let size = set.len() as f64;
            for &i in set {
                log_f[i] = ll;
                counts[i] = (exposed - usize::from(design.exposure()[i]), set.len() - 1);
                if with_score {
                    for (o, g) in score[i * width..(i + 1) * width].iter_mut().zip(&grad) {
                        *o = g / size;
                    }
                }
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
