//! Smooth unconstrained minimization: BFGS with Armijo backtracking, and a
//! Newton polish on a finite-difference Hessian when the line search can no
//! longer resolve a decrease in the objective.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::math::max_abs;

pub trait Objective {
    fn dim(&self) -> usize;

    /// Objective value at `x`, writing the gradient into `grad`. Non-finite
    /// values mark `x` as infeasible.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct OptimOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl OptimResult {
    pub fn grad_norm(&self) -> f64 {
        max_abs(&self.grad)
    }
}

pub fn minimize<O: Objective>(obj: &O, x0: &[f64], opts: OptimOptions) -> OptimResult {
    let p = obj.dim();
    assert_eq!(x0.len(), p);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; p];
    let mut f = obj.eval(&x, &mut g);
    let mut h_inv = DMatrix::<f64>::identity(p, p);
    let mut fresh = true;
    let mut x_new = vec![0.0; p];
    let mut g_new = vec![0.0; p];

    let mut iter = 0;
    while iter < opts.max_iter {
        if max_abs(&g) < opts.grad_tol {
            return done(x, f, g, iter, true);
        }
        iter += 1;

        let gv = DVector::from_column_slice(&g);
        let mut dir = -(&h_inv * &gv);
        let mut slope = dir.dot(&gv);
        if !(slope < 0.0) {
            h_inv = DMatrix::identity(p, p);
            fresh = true;
            dir = -gv.clone();
            slope = dir.dot(&gv);
        }
        if fresh {
            // First step along the gradient: cap its length.
            let norm = dir.norm();
            if norm > 1.0 {
                dir /= norm;
                slope /= norm;
            }
        }

        let mut t = 1.0;
        let mut accepted = false;
        // Sixteen halvings; a shorter acceptable step means the objective is
        // at roundoff level and Newton on the gradient does better.
        for _ in 0..16 {
            for k in 0..p {
                x_new[k] = x[k] + t * dir[k];
            }
            if x_new == x {
                // Step no longer representable.
                break;
            }
            let f_new = obj.eval(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= f + 1e-4 * t * slope {
                accepted = true;
                let s = DVector::from_fn(p, |k, _| x_new[k] - x[k]);
                let y = DVector::from_fn(p, |k, _| g_new[k] - g[k]);
                let sy = s.dot(&y);
                if sy > 1e-12 * s.norm() * y.norm() {
                    if fresh {
                        h_inv *= sy / y.dot(&y);
                        fresh = false;
                    }
                    let rho = 1.0 / sy;
                    let hy = &h_inv * &y;
                    let yhy = y.dot(&hy);
                    h_inv += (&s * s.transpose()) * (rho * (1.0 + rho * yhy))
                        - (&hy * s.transpose() + &s * hy.transpose()) * rho;
                }
                x.copy_from_slice(&x_new);
                g.copy_from_slice(&g_new);
                f = f_new;
                break;
            }
            t *= 0.5;
        }

        if !accepted {
            // Finish with Newton steps on the gradient.
            match newton_polish(obj, &mut x, &mut g, opts, &mut iter) {
                Some(value) => {
                    f = value;
                    return done(x, f, g.clone(), iter, max_abs(&g) < opts.grad_tol);
                }
                None => return done(x, f, g, iter, false),
            }
        }
    }
    let converged = max_abs(&g) < opts.grad_tol;
    done(x, f, g, iter, converged)
}

fn done(x: Vec<f64>, value: f64, grad: Vec<f64>, iterations: usize, converged: bool) -> OptimResult {
    OptimResult {
        x,
        value,
        grad,
        iterations,
        converged,
    }
}

/// Newton iterations with a central-difference Hessian of the analytic
/// gradient. Each step is kept only if it shrinks the gradient max-norm.
fn newton_polish<O: Objective>(
    obj: &O,
    x: &mut [f64],
    g: &mut [f64],
    opts: OptimOptions,
    iter: &mut usize,
) -> Option<f64> {
    let p = x.len();
    let mut value = None;
    let mut scratch = vec![0.0; p];
    let mut gp = vec![0.0; p];
    let mut gm = vec![0.0; p];
    for _ in 0..20 {
        if max_abs(g) < opts.grad_tol || *iter >= opts.max_iter {
            break;
        }
        *iter += 1;
        let hess = fd_jacobian(x, &mut scratch, &mut gp, &mut gm, |pt, out| {
            obj.eval(pt, out);
        });
        let sym = (&hess + hess.transpose()) * 0.5;
        let rhs = DVector::from_column_slice(g);
        let step = sym.lu().solve(&rhs)?;
        let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a - b).collect();
        let mut g_trial = vec![0.0; p];
        let f_trial = obj.eval(&trial, &mut g_trial);
        if !f_trial.is_finite() || max_abs(&g_trial) >= max_abs(g) {
            break;
        }
        x.copy_from_slice(&trial);
        g.copy_from_slice(&g_trial);
        value = Some(f_trial);
    }
    match value {
        Some(v) => Some(v),
        None => {
            let mut g0 = vec![0.0; p];
            let v = obj.eval(x, &mut g0);
            Some(v).filter(|_| max_abs(g) < opts.grad_tol)
        }
    }
}

/// Central-difference Jacobian of a vector function, step `1e-5·max(1, |x_j|)`.
/// Column `j` holds `∂f/∂x_j`.
pub fn fd_jacobian(
    x: &[f64],
    scratch: &mut [f64],
    plus: &mut [f64],
    minus: &mut [f64],
    mut f: impl FnMut(&[f64], &mut [f64]),
) -> DMatrix<f64> {
    let p = x.len();
    let q = plus.len();
    let mut jac = DMatrix::zeros(q, p);
    scratch.copy_from_slice(x);
    for j in 0..p {
        let h = 1e-5 * x[j].abs().max(1.0);
        scratch[j] = x[j] + h;
        f(scratch, plus);
        scratch[j] = x[j] - h;
        f(scratch, minus);
        scratch[j] = x[j];
        for r in 0..q {
            jac[(r, j)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    jac
}
