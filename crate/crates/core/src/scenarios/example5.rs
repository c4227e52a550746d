//! Mass-spring-damper plant `x1'' = -theta1 x1 - theta2 x1' + theta3 u` with
//! first-order filters `H(p) = 1 / (p + lambda)`.
//!
//! Plant and filters form one linear time-invariant system with state
//! `s = (x1, x2, u, H[x1], H[x2], H[u])` (constant input carried as a state),
//! which is evaluated exactly with matrix exponentials. With zero filter
//! initial conditions the regression `y = phi^T theta` holds identically.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::ct::Sampler;
use crate::error::Result;
use crate::regression::{MonotoneMap, RegressionSample};

/// Quantum for caching propagators by time increment.
const DT_QUANTUM: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Example5Sampler {
    a: DMatrix<f64>,
    s0: DVector<f64>,
    lambda: f64,
    base_t: f64,
    base_s: DVector<f64>,
    cache: HashMap<i64, DMatrix<f64>>,
}

impl Example5Sampler {
    /// `theta` are the plant coefficients, `u` the constant input, and the
    /// plant starts at rest.
    pub fn new(theta: [f64; 3], lambda: f64, u: f64) -> Self {
        let mut a = DMatrix::zeros(6, 6);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = -theta[0];
        a[(1, 1)] = -theta[1];
        a[(1, 2)] = theta[2];
        for i in 0..3 {
            a[(3 + i, 3 + i)] = -lambda;
            a[(3 + i, i)] = 1.0;
        }
        let mut s0 = DVector::zeros(6);
        s0[2] = u;
        Self { a, base_t: 0.0, base_s: s0.clone(), s0, lambda, cache: HashMap::new() }
    }

    fn propagator(&mut self, dt: f64) -> (i64, &DMatrix<f64>) {
        let key = (dt / DT_QUANTUM).round() as i64;
        let a = &self.a;
        let m = self.cache.entry(key).or_insert_with(|| (a * (key as f64 * DT_QUANTUM)).exp());
        (key, m)
    }

    /// Augmented plant/filter state at time `t`.
    pub fn state_at(&mut self, t: f64) -> DVector<f64> {
        let dt = t - self.base_t;
        if !(0.0..=1.0).contains(&dt) {
            let s = (&self.a * t).exp() * &self.s0;
            self.base_t = t;
            self.base_s = s.clone();
            return s;
        }
        let base = self.base_s.clone();
        let (key, m) = self.propagator(dt);
        let s = m * base;
        if key != 0 {
            self.base_t = t;
            self.base_s = s.clone();
        }
        if self.cache.len() > 64 {
            self.cache.clear();
        }
        s
    }

    pub fn regression_at(&mut self, t: f64) -> RegressionSample {
        let s = self.state_at(t);
        let l = self.lambda;
        let (x1, x2, h1, h2, hu) = (s[0], s[1], s[3], s[4], s[5]);
        let phi = DVector::from_vec(vec![-h1, -(x1 - l * h1), hu]);
        RegressionSample::new(t, phi, x2 - l * h2)
    }
}

impl Sampler for Example5Sampler {
    fn sample(&mut self, t: f64) -> RegressionSample {
        self.regression_at(t)
    }
}

/// `G(theta) = (theta1, theta2, theta2 - theta1)` with `Q` selecting the
/// first two rows; `rho = 1`, `nu = sqrt(3)`.
pub fn reduced_map() -> Result<MonotoneMap> {
    let l = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 1.0]);
    let q = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    MonotoneMap::linear(l, q, 1.0, 3f64.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_is_exact() {
        let theta = [2.0, 3.0, 1.0];
        let mut s = Example5Sampler::new(theta, 1.0, 5.0);
        let th = DVector::from_column_slice(&theta);
        for k in 0..2000 {
            let r = s.regression_at(k as f64 * 5e-3);
            assert!((r.y - r.phi.dot(&th)).abs() < 1e-12);
        }
    }

    #[test]
    fn state_matches_direct_exponential() {
        let mut s = Example5Sampler::new([2.0, 3.0, 1.0], 1.0, 5.0);
        let mut t = 0.0;
        for _ in 0..3000 {
            t += 1e-3;
            s.state_at(t - 5e-4);
            s.state_at(t);
        }
        let direct = (&s.a * t).exp() * &s.s0;
        assert!((s.state_at(t) - direct).norm() < 1e-10);
        // DC steady state x1 = theta3 u / theta1
        let late = s.state_at(40.0);
        assert!((late[0] - 2.5).abs() < 1e-9);
    }
}
