//! Small dense helpers shared by the estimators. Matrices here are at most a
//! handful of rows, so everything is plain `DMatrix<f64>`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Singular-value ratio below which a direction counts as numerically absent.
pub const RANK_RTOL: f64 = 1e-10;

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// (smallest, largest) eigenvalue of a symmetric matrix.
pub fn sym_eig_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Spectral norm of a symmetric positive semidefinite matrix (its largest eigenvalue).
pub fn sym_norm(m: &DMatrix<f64>) -> f64 {
    sym_eig_extremes(m).1
}

pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite()) && m.clone().cholesky().is_some()
}

pub fn all_finite_vec(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub fn all_finite_mat(m: &DMatrix<f64>) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Singular-value summary of a matrix: `(rank, sigma_min, sigma_max)` where
/// `rank` counts singular values with `sigma_i / sigma_max > RANK_RTOL` and
/// `sigma_min` is the smallest of the `min(rows, cols)` singular values.
pub fn numerical_rank(m: &DMatrix<f64>) -> (usize, f64, f64) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0, 0.0, 0.0);
    }
    let sv = m.singular_values();
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if hi == 0.0 {
        return (0, 0.0, 0.0);
    }
    let rank = sv.iter().filter(|&&s| s / hi > RANK_RTOL).count();
    (rank, lo, hi)
}
