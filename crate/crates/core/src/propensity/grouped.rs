//! Random-intercept logistic model over node sets: within a set the
//! exposures are independent given a shared `b ~ N(0, ψ)`, and the set
//! likelihood integrates `b` out by Gauss–Hermite quadrature.
//!
//! Parameters are `[γ…, τ]` with `ψ = e^τ`, or `[γ…]` when `ψ` is held at 0.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, log, sqrt};

use crate::data::Design;
use crate::error::{Error, Result};
use crate::linalg::design_rank;
use crate::math::{expit, log_expit, log_sum_exp};
use crate::optim::{minimize, Objective, OptimOptions};
use crate::quadrature::GaussHermite;

use super::glm::PROBABILITY_FLOOR;

/// Node sets in compressed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Sets {
    offsets: Vec<usize>,
    members: Vec<usize>,
}

impl Sets {
    pub fn from_lists<'a>(lists: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut offsets = vec![0];
        let mut members = Vec::new();
        for l in lists {
            members.extend_from_slice(l);
            offsets.push(members.len());
        }
        Self { offsets, members }
    }

    pub fn closed_neighborhoods(design: &Design) -> Self {
        Self::from_lists((0..design.n()).map(|i| design.closed_neighborhood(i)))
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn get(&self, s: usize) -> &[usize] {
        &self.members[self.offsets[s]..self.offsets[s + 1]]
    }
}

/// `ln P(A_j | b_q)` and `A_j − P(A_j = 1 | b_q)` for every node `j` and
/// abscissa `b_q`, row-major by node.
pub(crate) struct Tables {
    b: Vec<f64>,
    lw: Vec<f64>,
    ll: Vec<f64>,
    resid: Vec<f64>,
}

/// Parameters plus the quadrature rule.
#[derive(Debug, Clone)]
pub(crate) struct RandomIntercept {
    pub gamma: Vec<f64>,
    pub psi: f64,
    /// Whether `ψ` is a free parameter (and `τ = ln ψ` part of `Θ`).
    pub psi_free: bool,
    pub rule: Arc<GaussHermite>,
}

/// τ above this is treated as infeasible (ψ > e^20).
const TAU_MAX: f64 = 20.0;

impl RandomIntercept {
    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.gamma.clone();
        if self.psi_free {
            t.push(log(self.psi));
        }
        t
    }

    pub fn with_theta(&self, theta: &[f64]) -> Self {
        let k = self.gamma.len();
        Self {
            gamma: theta[..k].to_vec(),
            psi: if self.psi_free { exp(theta[k]) } else { 0.0 },
            psi_free: self.psi_free,
            rule: self.rule.clone(),
        }
    }

    pub fn width(&self) -> usize {
        self.gamma.len() + usize::from(self.psi_free)
    }

    pub fn linear_predictors(&self, design: &Design) -> Vec<f64> {
        (0..design.n())
            .map(|i| design.x(i).iter().zip(&self.gamma).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Per-node, per-abscissa terms shared by every set containing the node.
    pub fn tables(&self, design: &Design, eta: &[f64]) -> Tables {
        let (b, lw): (Vec<f64>, Vec<f64>) = if !self.psi_free || self.psi == 0.0 {
            (vec![0.0], vec![0.0])
        } else {
            let scale = sqrt(2.0 * self.psi);
            (
                self.rule.nodes().iter().map(|x| scale * x).collect(),
                self.rule.normal_log_weights().collect(),
            )
        };
        let q = b.len();
        let n = design.n();
        let mut ll = Vec::with_capacity(n * q);
        let mut resid = Vec::with_capacity(n * q);
        for (j, &a) in design.exposure().iter().enumerate() {
            for &bq in &b {
                let t = eta[j] + bq;
                let p = expit(t);
                ll.push(if a { log_expit(t) } else { log_expit(-t) });
                resid.push(if a { 1.0 - p } else { -p });
            }
        }
        Tables { b, lw, ll, resid }
    }

    /// Log-likelihood of one set, adding its gradient into `grad` if given.
    pub fn set_loglik(&self, design: &Design, tables: &Tables, set: &[usize], grad: Option<&mut [f64]>) -> f64 {
        let q = tables.b.len();
        let mut terms: Vec<f64> = tables.lw.clone();
        for &j in set {
            for (t, l) in terms.iter_mut().zip(&tables.ll[j * q..(j + 1) * q]) {
                *t += l;
            }
        }
        let total = if q == 1 { terms[0] } else { log_sum_exp(&terms) };
        if let Some(g) = grad {
            let k = self.gamma.len();
            for t in terms.iter_mut() {
                *t = exp(*t - total);
            }
            let mut tau = 0.0;
            for &j in set {
                let r = &tables.resid[j * q..(j + 1) * q];
                let rj: f64 = terms.iter().zip(r).map(|(w, r)| w * r).sum();
                for (gv, xv) in g[..k].iter_mut().zip(design.x(j)) {
                    *gv += rj * xv;
                }
                if self.psi_free {
                    // ∂b/∂τ = b/2
                    tau += terms.iter().zip(r).zip(&tables.b).map(|((w, r), b)| w * r * b).sum::<f64>();
                }
            }
            if self.psi_free {
                g[k] += 0.5 * tau;
            }
        }
        total
    }

    /// Fails if any individual probability at `b = 0` is numerically 0 or 1.
    pub fn check_separation(&self, model: &'static str, design: &Design) -> Result<()> {
        for eta in self.linear_predictors(design) {
            let p = expit(eta);
            if !(PROBABILITY_FLOOR..=1.0 - PROBABILITY_FLOOR).contains(&p) {
                return Err(Error::Separation { model });
            }
        }
        Ok(())
    }
}

/// Composite objective `−Σ_sets ln L_set`.
struct Composite<'a> {
    design: &'a Design,
    sets: &'a Sets,
    template: &'a RandomIntercept,
}

impl Objective for Composite<'_> {
    fn dim(&self) -> usize {
        self.template.width()
    }

    fn eval(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        if self.template.psi_free && theta[theta.len() - 1] > TAU_MAX {
            return f64::INFINITY;
        }
        let model = self.template.with_theta(theta);
        let tables = model.tables(self.design, &model.linear_predictors(self.design));
        grad.fill(0.0);
        let mut ll = 0.0;
        for s in 0..self.sets.len() {
            ll += model.set_loglik(self.design, &tables, self.sets.get(s), Some(grad));
        }
        for g in grad.iter_mut() {
            *g = -*g;
        }
        -ll
    }
}

#[derive(Debug, Clone)]
pub(crate) struct GroupedFit {
    pub model: RandomIntercept,
    pub loglik: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Fits `γ` with `ψ = 0`, then (unless `fix_psi_zero`) `γ` and `τ` jointly.
/// A variance estimate below `psi_boundary` falls back to the `ψ = 0` fit.
pub(crate) fn fit_grouped(
    model_name: &'static str,
    design: &Design,
    sets: &Sets,
    quadrature_nodes: usize,
    fix_psi_zero: bool,
    psi_boundary: f64,
    opts: OptimOptions,
) -> Result<GroupedFit> {
    let k = design.x_width();
    let rows: Vec<f64> = (0..design.n()).flat_map(|i| design.x(i).iter().copied()).collect();
    let rank = design_rank(&rows, k);
    if rank < k {
        return Err(Error::RankDeficient {
            model: model_name,
            rank,
            cols: k,
        });
    }
    let first = design.exposure()[0];
    if design.exposure().iter().all(|&a| a == first) {
        return Err(Error::Separation { model: model_name });
    }

    let rule = Arc::new(GaussHermite::new(quadrature_nodes));
    let fixed = RandomIntercept {
        gamma: vec![0.0; k],
        psi: 0.0,
        psi_free: false,
        rule: rule.clone(),
    };
    let obj = Composite {
        design,
        sets,
        template: &fixed,
    };
    let r0 = minimize(&obj, &vec![0.0; k], opts);
    if !r0.converged {
        return Err(no_convergence(model_name, r0));
    }
    let fixed_fit = GroupedFit {
        model: fixed.with_theta(&r0.x),
        loglik: -r0.value,
        iterations: r0.iterations,
        grad_norm: r0.grad_norm(),
    };
    if fix_psi_zero {
        fixed_fit.model.check_separation(model_name, design)?;
        return Ok(fixed_fit);
    }

    let free = RandomIntercept {
        psi: 0.1,
        psi_free: true,
        ..fixed_fit.model.clone()
    };
    let obj = Composite {
        design,
        sets,
        template: &free,
    };
    let r = minimize(&obj, &free.theta(), opts);
    let psi = exp(r.x[k]);
    if psi < psi_boundary {
        fixed_fit.model.check_separation(model_name, design)?;
        return Ok(fixed_fit);
    }
    if !r.converged {
        return Err(no_convergence(model_name, r));
    }
    let fit = GroupedFit {
        model: free.with_theta(&r.x),
        loglik: -r.value,
        iterations: r0.iterations + r.iterations,
        grad_norm: r.grad_norm(),
    };
    fit.model.check_separation(model_name, design)?;
    Ok(fit)
}

fn no_convergence(model: &'static str, r: crate::optim::OptimResult) -> Error {
    Error::NoConvergence {
        model,
        iterations: r.iterations,
        grad_norm: r.grad_norm(),
        last: r.x,
    }
}
