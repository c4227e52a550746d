use nalgebra::{DMatrix, DVector, Scalar};
use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::ScalarRegression;
use crate::error::{Error, Result};

/// Adjugate and determinant by the Faddeev-LeVerrier recursion.
///
/// Runs over any field, which lets tests check `adj(A) A = det(A) I` exactly
/// in rational arithmetic. The recursion never divides by a matrix quantity,
/// so singular input is fine:
///
/// ```text
/// M_0 = 0,  c_n = 1
/// M_k = A M_{k-1} + c_{n-k+1} I,   c_{n-k} = -tr(A M_k) / k
/// det A = (-1)^n c_0,              adj A = (-1)^{n+1} M_n
/// ```
pub fn adjugate_generic<T>(a: &DMatrix<T>) -> Result<(DMatrix<T>, T)>
where
    T: Scalar + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T> + Neg<Output = T>,
{
    let n = a.nrows();
    if n != a.ncols() || n == 0 {
        return Err(Error::dim("adjugate", "non-empty square matrix", format!("{}x{}", a.nrows(), a.ncols())));
    }

    let mut m = DMatrix::<T>::from_element(n, n, T::zero());
    let mut am = m.clone();
    let mut coeff = T::one();
    let mut k_field = T::zero();

    for _k in 1..=n {
        k_field = k_field + T::one();
        // M_k = A M_{k-1} + c I, where A M_{k-1} is `am` from the previous round
        m = am.clone();
        for i in 0..n {
            m[(i, i)] = m[(i, i)].clone() + coeff.clone();
        }
        am = matmul(a, &m);
        let mut trace = T::zero();
        for i in 0..n {
            trace = trace + am[(i, i)].clone();
        }
        coeff = -(trace / k_field.clone());
    }

    // coeff now holds c_0, m holds M_n
    let (det, adj) = if n.is_multiple_of(2) { (coeff, m.map(|v| -v)) } else { (-coeff, m) };
    Ok((adj, det))
}

fn matmul<T>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T>
where
    T: Scalar + Zero + Add<Output = T> + Mul<Output = T>,
{
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let mut acc = T::zero();
        for l in 0..n {
            acc = acc + a[(i, l)].clone() * b[(l, j)].clone();
        }
        acc
    })
}

/// `(adj(A), det(A))` for a real square matrix. Non-finite entries are rejected.
pub fn adjugate(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if !crate::linalg::all_finite_mat(a) {
        return Err(Error::NonFinite("adjugate input"));
    }
    adjugate_generic(a)
}

/// DREM mixing step: `delta = det(Phi)`, `cal_y = adj(Phi) Y`.
pub fn mix(y: &DVector<f64>, phi: &DMatrix<f64>) -> Result<ScalarRegression> {
    if phi.nrows() != y.len() {
        return Err(Error::dim(
            "mix",
            format!("{0}x{0} regressor for Y of length {0}", y.len()),
            format!("{}x{}", phi.nrows(), phi.ncols()),
        ));
    }
    let (adj, delta) = adjugate(phi)?;
    Ok(ScalarRegression { delta, cal_y: adj * y })
}
