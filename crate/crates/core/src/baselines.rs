//! Normalized gradient and recursive least squares, for comparison runs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{all_finite_vec, is_positive_definite, symmetrize};
use crate::regression::RegressionSample;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientState {
    pub theta_hat: DVector<f64>,
    pub gain: DMatrix<f64>,
}

impl GradientState {
    pub fn new(theta0: DVector<f64>, gain: DMatrix<f64>) -> Result<Self> {
        let q = theta0.len();
        if gain.shape() != (q, q) {
            return Err(Error::dim("gradient gain", format!("{q}x{q}"), format!("{:?}", gain.shape())));
        }
        if !is_positive_definite(&gain) {
            return Err(Error::Config("gradient gain must be positive definite".into()));
        }
        Ok(Self { theta_hat: theta0, gain })
    }
}

/// `theta_hat+ = theta_hat + Gamma phi e / (1 + phi^T Gamma phi)`.
pub fn gradient_step_dt(state: &GradientState, sample: &RegressionSample) -> Result<GradientState> {
    sample.validate(state.theta_hat.len())?;
    let phi = &sample.phi;
    let g = &state.gain * phi;
    let err = sample.y - phi.dot(&state.theta_hat);
    let theta_hat = &state.theta_hat + &g * (err / (1.0 + phi.dot(&g)));
    if !all_finite_vec(&theta_hat) {
        return Err(Error::NonFinite("gradient estimate"));
    }
    Ok(GradientState { theta_hat, gain: state.gain.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RlsState {
    pub theta_hat: DVector<f64>,
    pub p: DMatrix<f64>,
    pub lambda: f64,
}

impl RlsState {
    pub fn new(theta0: DVector<f64>, p0: DMatrix<f64>, lambda: f64) -> Result<Self> {
        let q = theta0.len();
        if p0.shape() != (q, q) {
            return Err(Error::dim("RLS covariance", format!("{q}x{q}"), format!("{:?}", p0.shape())));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidGain { name: "lambda", bound: "lambda ∈ (0,1]", value: lambda });
        }
        if !is_positive_definite(&p0) {
            return Err(Error::Config("RLS covariance must be positive definite".into()));
        }
        Ok(Self { theta_hat: theta0, p: p0, lambda })
    }
}

pub fn rls_step_dt(state: &RlsState, sample: &RegressionSample) -> Result<RlsState> {
    sample.validate(state.theta_hat.len())?;
    let phi = &sample.phi;
    let p_phi = &state.p * phi;
    let k = &p_phi / (state.lambda + phi.dot(&p_phi));
    let err = sample.y - phi.dot(&state.theta_hat);
    let theta_hat = &state.theta_hat + &k * err;
    let mut p = (&state.p - &k * p_phi.transpose()) / state.lambda;
    symmetrize(&mut p);
    if !all_finite_vec(&theta_hat) || !p.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("RLS state"));
    }
    Ok(RlsState { theta_hat, p, lambda: state.lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn gradient_fixed_points() {
        let s = GradientState::new(v(&[1.0, 2.0]), DMatrix::identity(2, 2)).unwrap();
        let same = gradient_step_dt(&s, &RegressionSample::new(0.0, v(&[0.0, 0.0]), 3.0)).unwrap();
        assert_eq!(same, s);
        let at_truth = gradient_step_dt(&s, &RegressionSample::new(0.0, v(&[1.0, 1.0]), 3.0)).unwrap();
        assert_eq!(at_truth.theta_hat, s.theta_hat);
    }

    #[test]
    fn rls_zero_regressor_inflates_covariance() {
        let s = RlsState::new(v(&[0.0]), DMatrix::identity(1, 1), 0.5).unwrap();
        let n = rls_step_dt(&s, &RegressionSample::new(0.0, v(&[0.0]), 0.0)).unwrap();
        assert_relative_eq!(n.p[(0, 0)], 2.0);
    }

    #[test]
    fn rls_one_step_by_hand() {
        let s = RlsState::new(v(&[0.0]), DMatrix::identity(1, 1), 1.0).unwrap();
        let n = rls_step_dt(&s, &RegressionSample::new(0.0, v(&[1.0]), 1.0)).unwrap();
        assert_relative_eq!(n.theta_hat[0], 0.5);
        assert_relative_eq!(n.p[(0, 0)], 0.5);
    }

    #[test]
    fn rejects_invalid_configuration() {
        assert!(RlsState::new(v(&[0.0]), DMatrix::identity(1, 1), 1.2).is_err());
        assert!(GradientState::new(v(&[0.0]), -DMatrix::identity(1, 1)).is_err());
    }
}
