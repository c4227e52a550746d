//! First-order plant `y_k = theta1 y_{k-1} + theta2 u_{k-1}` with regressor
//! `phi_k = (y_{k-1}, u_{k-1})`.

use nalgebra::DVector;

use crate::regression::RegressionSample;

#[derive(Debug, Clone, PartialEq)]
pub struct Example4Plant {
    theta: [f64; 2],
    input: f64,
    y_prev: f64,
    u_prev: f64,
    k: u64,
}

impl Example4Plant {
    pub fn new(theta: [f64; 2], input: f64, y_prev: f64, u_prev: f64) -> Self {
        Self { theta, input, y_prev, u_prev, k: 0 }
    }

    /// Produces `(phi_k, y_k)` and advances to `k + 1`.
    pub fn next_sample(&mut self) -> RegressionSample {
        let phi = DVector::from_vec(vec![self.y_prev, self.u_prev]);
        let y = self.theta[0] * self.y_prev + self.theta[1] * self.u_prev;
        let sample = RegressionSample::new(self.k as f64, phi, y);
        self.y_prev = y;
        self.u_prev = self.input;
        self.k += 1;
        sample
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reaches_geometric_limit() {
        let mut p = Example4Plant::new([0.4, 0.8], 1.0, 0.0, 0.0);
        let mut last = 0.0;
        for _ in 0..200 {
            last = p.next_sample().y;
        }
        assert!((last - 0.8 / 0.6).abs() < 1e-14);
    }
}
