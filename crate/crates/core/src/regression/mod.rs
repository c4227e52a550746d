//! Regression-equation building blocks: the nonlinear parameterization,
//! regressor extension and mixing, excitation tests and the sampling-based
//! assumption checkers.

mod adjugate;
mod assumptions;
mod excitation;
mod extension;
mod map;

pub use adjugate::{adjugate, adjugate_generic, mix};
pub use assumptions::{check_lipschitz, check_monotonicity, CheckOutcome, SampleBox};
pub use excitation::{identifiability_check, ie_check_ct, ie_check_dt, ExcitationReport};
pub use extension::{
    kreisselmeier_extension_step, lion_extension_step, ExtendedRegression, KreisselmeierFilter, LionFilter,
};
pub use map::MonotoneMap;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// One measurement of `y = phi^T G(theta)`. `time` is the continuous time for
/// CT data and the sample index for DT data.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    pub time: f64,
    pub phi: DVector<f64>,
    pub y: f64,
}

impl RegressionSample {
    pub fn new(time: f64, phi: DVector<f64>, y: f64) -> Self {
        Self { time, phi, y }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.phi.len() != dim {
            return Err(Error::dim("regression sample", dim, self.phi.len()));
        }
        if !self.y.is_finite() || !crate::linalg::all_finite_vec(&self.phi) {
            return Err(Error::NonFinite("regression sample"));
        }
        Ok(())
    }
}

/// Output of the mixing step: the scalar regressor `delta` and the vector
/// `cal_y` with `cal_y = delta * G(theta)` on unperturbed data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRegression {
    pub delta: f64,
    pub cal_y: DVector<f64>,
}
