//! Small dense linear-algebra helpers over nalgebra.

use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest tolerated 2-norm condition number before a solve is refused.
pub const MAX_CONDITION: f64 = 1e10;

/// Ratio of the largest to smallest singular value (infinite if singular).
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a square matrix via QR, refused when its condition number
/// exceeds [`MAX_CONDITION`].
pub fn guarded_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cond = condition_number(a);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularBread(cond));
    }
    let n = a.nrows();
    a.clone()
        .qr()
        .solve(&DMatrix::identity(n, n))
        .ok_or(Error::SingularBread(cond))
}

pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i + 1..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Numerical rank of a row-major design with `cols` columns, from the
/// singular values of `XᵀX`.
pub fn design_rank(rows: &[f64], cols: usize) -> usize {
    let n = rows.len() / cols;
    let mut xtx = DMatrix::<f64>::zeros(cols, cols);
    for r in 0..n {
        let x = &rows[r * cols..(r + 1) * cols];
        for a in 0..cols {
            for b in 0..cols {
                xtx[(a, b)] += x[a] * x[b];
            }
        }
    }
    let sv: Vec<f64> = xtx.singular_values().iter().cloned().collect();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > max * 1e-12 && s > 0.0).count()
}
