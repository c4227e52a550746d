use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

type EvalFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type JacobianFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// A separable parameterization `G: R^q -> R^p` together with the mixing
/// matrix `Q` (q x p) and the constants `rho` (strong monotonicity of `Q G`)
/// and `nu` (Lipschitz constant of `G`).
#[derive(Clone)]
pub struct MonotoneMap {
    dim_theta: usize,
    dim_g: usize,
    eval: Arc<EvalFn>,
    jacobian: Option<Arc<JacobianFn>>,
    mixing: DMatrix<f64>,
    rho: f64,
    nu: f64,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneMap")
            .field("dim_theta", &self.dim_theta)
            .field("dim_g", &self.dim_g)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("mixing", &self.mixing)
            .field("rho", &self.rho)
            .field("nu", &self.nu)
            .finish()
    }
}

impl MonotoneMap {
    pub fn new<F>(dim_theta: usize, dim_g: usize, eval: F, mixing: DMatrix<f64>, rho: f64, nu: f64) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        if dim_theta == 0 || dim_g < dim_theta {
            return Err(Error::dim("monotone map", "1 <= q <= p", format!("q={dim_theta}, p={dim_g}")));
        }
        if mixing.shape() != (dim_theta, dim_g) {
            return Err(Error::dim(
                "mixing matrix Q",
                format!("{dim_theta}x{dim_g}"),
                format!("{}x{}", mixing.nrows(), mixing.ncols()),
            ));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidGain { name: "rho", bound: "rho > 0", value: rho });
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidGain { name: "nu", bound: "nu > 0", value: nu });
        }
        Ok(Self { dim_theta, dim_g, eval: Arc::new(eval), jacobian: None, mixing, rho, nu })
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// `G(theta) = theta`, `Q = I`, `rho = nu = 1`: the linearly parameterized case.
    pub fn identity(dim: usize) -> Self {
        Self::linear(DMatrix::identity(dim, dim), DMatrix::identity(dim, dim), 1.0, 1.0)
            .expect("identity map is always valid")
    }

    /// `G(theta) = L theta` for a constant p x q matrix `L`.
    pub fn linear(l: DMatrix<f64>, mixing: DMatrix<f64>, rho: f64, nu: f64) -> Result<Self> {
        let (p, q) = l.shape();
        let lj = l.clone();
        Ok(Self::new(q, p, move |th| &l * th, mixing, rho, nu)?.with_jacobian(move |_| lj.clone()))
    }

    pub fn dim_theta(&self) -> usize {
        self.dim_theta
    }

    pub fn dim_g(&self) -> usize {
        self.dim_g
    }

    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.mixing
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn evaluate(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        if theta.len() != self.dim_theta {
            return Err(Error::dim("G(theta)", self.dim_theta, theta.len()));
        }
        let g = (self.eval)(theta);
        if g.len() != self.dim_g {
            return Err(Error::dim("G(theta) output", self.dim_g, g.len()));
        }
        Ok(g)
    }

    /// Jacobian of `G` at `theta`; central differences with step
    /// `1e-6 * (1 + |theta_i|)` when no analytic Jacobian was supplied.
    pub fn jacobian_at(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        if let Some(jac) = &self.jacobian {
            if theta.len() != self.dim_theta {
                return Err(Error::dim("jacobian", self.dim_theta, theta.len()));
            }
            let j = jac(theta);
            if j.shape() != (self.dim_g, self.dim_theta) {
                return Err(Error::dim(
                    "jacobian output",
                    format!("{}x{}", self.dim_g, self.dim_theta),
                    format!("{}x{}", j.nrows(), j.ncols()),
                ));
            }
            return Ok(j);
        }
        let mut j = DMatrix::zeros(self.dim_g, self.dim_theta);
        for i in 0..self.dim_theta {
            let step = 1e-6 * (1.0 + theta[i].abs());
            let mut plus = theta.clone();
            let mut minus = theta.clone();
            plus[i] += step;
            minus[i] -= step;
            let col = (self.evaluate(&plus)? - self.evaluate(&minus)?) / (2.0 * step);
            j.set_column(i, &col);
        }
        Ok(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finite_difference_matches_analytic() {
        let q = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let map = MonotoneMap::new(
            2,
            3,
            |t: &DVector<f64>| DVector::from_vec(vec![t[0] + t[0].sin() * 0.3, t[1].powi(3) / 3.0 + t[1], t[0] * t[1]]),
            q,
            0.7,
            10.0,
        )
        .unwrap();
        let th = DVector::from_vec(vec![0.4, -1.2]);
        let fd = map.jacobian_at(&th).unwrap();
        let exact =
            DMatrix::from_row_slice(3, 2, &[1.0 + 0.3 * 0.4f64.cos(), 0.0, 0.0, 1.2f64.powi(2) + 1.0, -1.2, 0.4]);
        assert_relative_eq!(fd, exact, epsilon = 1e-8);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(MonotoneMap::new(3, 2, |t: &DVector<f64>| t.clone(), DMatrix::identity(3, 2), 1.0, 1.0).is_err());
        assert!(MonotoneMap::new(2, 2, |t: &DVector<f64>| t.clone(), DMatrix::identity(2, 3), 1.0, 1.0).is_err());
        assert!(MonotoneMap::new(2, 2, |t: &DVector<f64>| t.clone(), DMatrix::identity(2, 2), 0.0, 1.0).is_err());
        let id = MonotoneMap::identity(2);
        assert!(id.evaluate(&DVector::zeros(3)).is_err());
    }
}
