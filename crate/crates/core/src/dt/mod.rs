//! Discrete-time normalized LS + DREM interlaced estimator.

mod switched;

pub use switched::{switched_outputs, switched_step, SwitchSchedule, SwitchedDtState};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite_mat, all_finite_vec, is_positive_definite, sym_eig_extremes, symmetrize};
use crate::regression::{mix, MonotoneMap, RegressionSample, ScalarRegression};

/// Weighting of the scalar-regressor correction in the parameter update.
///
/// `Unit` uses `Delta / (1 + Delta^2)`. `GainWeighted` uses
/// `Delta / (1 + gamma Delta^2)`, which keeps the per-step contraction
/// `1 - gamma Delta^2 / (1 + gamma Delta^2)` inside `[0, 1]` for any `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Unit,
    GainWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtGains {
    f0: f64,
    beta: f64,
    gamma: f64,
    normalization: Normalization,
}

impl DtGains {
    pub fn new(f0: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(f0 > 0.0) || !f0.is_finite() {
            return Err(Error::InvalidGain { name: "f0", bound: "f0 > 0", value: f0 });
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidGain { name: "beta", bound: "beta ∈ (0,1]", value: beta });
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidGain { name: "gamma", bound: "gamma > 0", value: gamma });
        }
        Ok(Self { f0, beta, gamma, normalization: Normalization::Unit })
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Scalar multiplying `Q (cal_y - Delta G(theta_hat))` in the update.
    pub fn update_weight(&self, delta: f64) -> f64 {
        let d2 = delta * delta;
        match self.normalization {
            Normalization::Unit => self.gamma * delta / (1.0 + d2),
            Normalization::GainWeighted => self.gamma * delta / (1.0 + self.gamma * d2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtEstimatorState {
    pub eta_hat: DVector<f64>,
    /// Gain consumed at step `k`, i.e. the one produced by step `k - 1`.
    pub f: DMatrix<f64>,
    /// `beta^k`.
    pub z: f64,
    pub theta_hat: DVector<f64>,
    pub k: u64,
    pub eta0: DVector<f64>,
}

impl DtEstimatorState {
    pub fn new(eta0: DVector<f64>, theta0: DVector<f64>, gains: &DtGains) -> Self {
        let p = eta0.len();
        Self { f: DMatrix::identity(p, p) / gains.f0, eta_hat: eta0.clone(), z: 1.0, theta_hat: theta0, k: 0, eta0 }
    }

    pub fn dim_p(&self) -> usize {
        self.eta_hat.len()
    }
}

pub(crate) fn check_shapes(
    eta_hat: &DVector<f64>,
    f: &DMatrix<f64>,
    theta_hat: &DVector<f64>,
    map: &MonotoneMap,
) -> Result<()> {
    let p = eta_hat.len();
    if f.shape() != (p, p) {
        return Err(Error::dim("F", format!("{p}x{p}"), format!("{}x{}", f.nrows(), f.ncols())));
    }
    if map.dim_g() != p {
        return Err(Error::dim("G(theta) vs eta_hat", p, map.dim_g()));
    }
    if theta_hat.len() != map.dim_theta() {
        return Err(Error::dim("theta_hat", map.dim_theta(), theta_hat.len()));
    }
    if !all_finite_vec(eta_hat) || !all_finite_mat(f) || !all_finite_vec(theta_hat) {
        return Err(Error::NonFinite("estimator state"));
    }
    Ok(())
}

/// `(Delta, cal_y)` from `Phi = I - f0 z F`, `Y = eta_hat - f0 z F anchor`.
pub(crate) fn outputs_with(
    eta_hat: &DVector<f64>,
    f: &DMatrix<f64>,
    z: f64,
    f0: f64,
    anchor: &DVector<f64>,
) -> Result<ScalarRegression> {
    let p = eta_hat.len();
    let zf = f * (f0 * z);
    mix(&(eta_hat - &zf * anchor), &(DMatrix::identity(p, p) - zf))
}

pub fn dt_outputs(state: &DtEstimatorState, gains: &DtGains) -> Result<ScalarRegression> {
    outputs_with(&state.eta_hat, &state.f, state.z, gains.f0, &state.eta0)
}

/// LS part of the step shared by the plain and switched estimators:
/// returns `(eta_hat+, F+)` before any reset.
pub(crate) fn ls_update(
    eta_hat: &DVector<f64>,
    f: &DMatrix<f64>,
    sample: &RegressionSample,
    beta: f64,
    step: u64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let phi = &sample.phi;
    let g = f * phi;
    let m = beta + phi.dot(&g);
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Normalization(m));
    }
    let eta_next = eta_hat + &g * ((sample.y - phi.dot(eta_hat)) / m);
    let mut f_next = (f - &g * g.transpose() / m) / beta;
    symmetrize(&mut f_next);
    if !all_finite_mat(&f_next) || !is_positive_definite(&f_next) {
        return Err(Error::LostDefiniteness { step });
    }
    Ok((eta_next, f_next))
}

pub fn dt_step(
    state: &DtEstimatorState,
    sample: &RegressionSample,
    gains: &DtGains,
    map: &MonotoneMap,
) -> Result<DtEstimatorState> {
    check_shapes(&state.eta_hat, &state.f, &state.theta_hat, map)?;
    if state.eta0.len() != state.dim_p() {
        return Err(Error::dim("eta0", state.dim_p(), state.eta0.len()));
    }
    sample.validate(state.dim_p())?;

    let sr = dt_outputs(state, gains)?;
    let (eta_hat, f) = ls_update(&state.eta_hat, &state.f, sample, gains.beta, state.k)?;
    let residual = &sr.cal_y - map.evaluate(&state.theta_hat)? * sr.delta;
    let theta_hat = &state.theta_hat + map.mixing() * residual * gains.update_weight(sr.delta);
    if !all_finite_vec(&theta_hat) {
        return Err(Error::NonFinite("theta_hat after step"));
    }
    Ok(DtEstimatorState { eta_hat, f, z: state.z * gains.beta, theta_hat, k: state.k + 1, eta0: state.eta0.clone() })
}

/// [`dt_step`] with `G(theta) = theta`, `Q = I`.
pub fn dt_linear_step(
    state: &DtEstimatorState,
    sample: &RegressionSample,
    gains: &DtGains,
) -> Result<DtEstimatorState> {
    dt_step(state, sample, gains, &MonotoneMap::identity(state.dim_p()))
}

/// `rho - (gamma nu^2 / 2) lambda_max(Q^T Q)`; positive values guarantee a
/// non-increasing `|theta_hat - theta|` for the discrete estimator.
pub fn sigma_margin(map: &MonotoneMap, gamma: f64) -> f64 {
    let q = map.mixing();
    let qtq = q.transpose() * q;
    map.rho() - 0.5 * gamma * map.nu() * map.nu() * sym_eig_extremes(&qtq).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn gain_bounds_are_named() {
        let e = DtGains::new(1.0, 1.5, 1.0).unwrap_err().to_string();
        assert!(e.contains("beta ∈ (0,1]"), "{e}");
        assert!(DtGains::new(0.0, 1.0, 1.0).is_err());
        assert!(DtGains::new(1.0, 1.0, 0.0).is_err());
        assert!(DtGains::new(1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn one_step_hand_evaluation() {
        let g = DtGains::new(1.0, 1.0, 1.0).unwrap();
        let s = DtEstimatorState::new(v(&[0.0]), v(&[0.0]), &g);
        let next = dt_linear_step(&s, &RegressionSample::new(0.0, v(&[1.0]), 1.0), &g).unwrap();
        assert_relative_eq!(next.eta_hat[0], 0.5);
        assert_relative_eq!(next.f[(0, 0)], 0.5);
        assert_eq!(next.k, 1);
        // Delta_0 = 0, so theta_hat does not move on the first step
        assert_eq!(next.theta_hat[0], 0.0);
    }

    #[test]
    fn zero_regressor_scales_gain() {
        let g = DtGains::new(2.0, 0.8, 1.0).unwrap();
        let mut s = DtEstimatorState::new(v(&[1.0, 1.0]), v(&[0.0, 0.0]), &g);
        s.f = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.2]);
        let next = dt_linear_step(&s, &RegressionSample::new(0.0, v(&[0.0, 0.0]), 0.0), &g).unwrap();
        assert_eq!(next.eta_hat, s.eta_hat);
        assert_relative_eq!(next.f, &s.f / 0.8, epsilon = 1e-15);
        assert_relative_eq!(next.z, 0.8);
    }

    #[test]
    fn initial_outputs_cancel() {
        let g = DtGains::new(0.7, 0.9, 1.0).unwrap();
        let s = DtEstimatorState::new(v(&[1.0, -2.0, 0.5]), v(&[0.0; 3]), &g);
        let sr = dt_outputs(&s, &g).unwrap();
        assert!(sr.delta.abs() < 1e-15 && sr.cal_y.norm() < 1e-15);
    }

    #[test]
    fn sigma_margin_examples() {
        assert_relative_eq!(sigma_margin(&MonotoneMap::identity(3), 1.0), 0.5);
        let l = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 1.0]);
        let q = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let map = MonotoneMap::linear(l, q, 1.0, 3f64.sqrt()).unwrap();
        assert!(sigma_margin(&map, 2.0 / 3.0).abs() < 1e-14);
        assert_relative_eq!(sigma_margin(&map, 1e-12), 1.0, epsilon = 1e-11);
    }

    #[test]
    fn weights() {
        let unit = DtGains::new(1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(unit.update_weight(1.0), 1.0);
        let gw = unit.with_normalization(Normalization::GainWeighted);
        assert_relative_eq!(gw.update_weight(1.0), 2.0 / 3.0);
    }

    #[test]
    fn equilibrium_is_preserved() {
        let g = DtGains::new(0.5, 0.95, 0.8).unwrap();
        let theta = v(&[0.3, -1.1]);
        let mut s = DtEstimatorState::new(v(&[0.0, 0.0]), theta.clone(), &g);
        for k in 0..200 {
            let phi = v(&[(k as f64 * 0.3).sin(), 1.0]);
            let y = phi.dot(&theta);
            s = dt_linear_step(&s, &RegressionSample::new(k as f64, phi, y), &g).unwrap();
        }
        assert_relative_eq!(s.theta_hat, theta, epsilon = 1e-12);
    }
}
