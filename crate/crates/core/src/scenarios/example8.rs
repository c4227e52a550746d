//! Second-order ARX plant whose coefficients switch at known instants,
//! `y_k = -a1 y_{k-1} - a2 y_{k-2} + b1 u_{k-1} + b2 u_{k-2}` with
//! `theta = (a1, a2, b1, b2)` and `phi_k = (-y_{k-1}, -y_{k-2}, u_{k-1}, u_{k-2})`.

use nalgebra::DVector;

use crate::dt::SwitchSchedule;
use crate::regression::RegressionSample;

#[derive(Debug, Clone, PartialEq)]
pub struct Example8Plant {
    regimes: Vec<DVector<f64>>,
    schedule: SwitchSchedule,
    y: [f64; 2],
    u: [f64; 2],
    k: u64,
}

impl Example8Plant {
    /// `y_init = (y_{-1}, y_{-2})`, `u_init = (u_{-1}, u_{-2})`.
    pub fn new(regimes: Vec<DVector<f64>>, schedule: SwitchSchedule, y_init: [f64; 2], u_init: [f64; 2]) -> Self {
        Self { regimes, schedule, y: y_init, u: u_init, k: 0 }
    }

    pub fn active_theta(&self) -> &DVector<f64> {
        let r = self.schedule.regime_of(self.k).min(self.regimes.len() - 1);
        &self.regimes[r]
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// Current regressor and output; the plant waits for [`Self::apply`].
    pub fn output(&self) -> RegressionSample {
        let phi = DVector::from_vec(vec![-self.y[0], -self.y[1], self.u[0], self.u[1]]);
        let y = phi.dot(self.active_theta());
        RegressionSample::new(self.k as f64, phi, y)
    }

    /// Shifts in `(y_k, u_k)` and moves to `k + 1`.
    pub fn apply(&mut self, y: f64, u: f64) {
        self.y = [y, self.y[0]];
        self.u = [u, self.u[0]];
        self.k += 1;
    }
}

/// Roots of `z^2 + a1 z + a2`, as complex pairs `(re, im)`.
pub fn open_loop_poles(a1: f64, a2: f64) -> [(f64, f64); 2] {
    let disc = a1 * a1 - 4.0 * a2;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [((-a1 + s) / 2.0, 0.0), ((-a1 - s) / 2.0, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [(-a1 / 2.0, s / 2.0), (-a1 / 2.0, -s / 2.0)]
    }
}
