//! Resetting estimator for piecewise-constant parameters with known
//! switching instants.

use nalgebra::{DMatrix, DVector};

use super::{check_shapes, ls_update, outputs_with, DtGains};
use crate::error::{Error, Result};
use crate::linalg::all_finite_vec;
use crate::regression::{MonotoneMap, RegressionSample, ScalarRegression};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SwitchSchedule {
    instants: Vec<u64>,
}

impl SwitchSchedule {
    pub fn new(instants: Vec<u64>) -> Result<Self> {
        if let Some(w) = instants.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Schedule(format!(
                "reset instants must be strictly increasing, got {} after {}",
                w[1], w[0]
            )));
        }
        Ok(Self { instants })
    }

    pub fn instants(&self) -> &[u64] {
        &self.instants
    }

    /// Checks that every inter-reset interval is at least `k_c` long.
    pub fn validate_dwell(&self, k_c: u64) -> Result<()> {
        for w in self.instants.windows(2) {
            if w[0] + k_c > w[1] {
                return Err(Error::Schedule(format!(
                    "interval [{}, {}) is shorter than the excitation window {k_c}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    pub fn is_reset(&self, k: u64) -> bool {
        self.instants.binary_search(&k).is_ok()
    }

    /// 0-based index of the parameter regime active at step `k`. A reset at
    /// instant 0 does not open a new regime.
    pub fn regime_of(&self, k: u64) -> usize {
        self.instants.iter().filter(|&&t| t > 0 && t <= k).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedDtState {
    pub eta_hat: DVector<f64>,
    pub f: DMatrix<f64>,
    /// Always 1: the resetting estimator runs without forgetting.
    pub z: f64,
    pub theta_hat: DVector<f64>,
    pub k: u64,
    pub eta0: DVector<f64>,
    /// `eta_hat` saved at the most recent reset.
    pub psi: DVector<f64>,
}

impl SwitchedDtState {
    pub fn new(eta0: DVector<f64>, theta0: DVector<f64>, gains: &DtGains) -> Self {
        let p = eta0.len();
        Self {
            f: DMatrix::identity(p, p) / gains.f0(),
            eta_hat: eta0.clone(),
            z: 1.0,
            theta_hat: theta0,
            k: 0,
            psi: eta0.clone(),
            eta0,
        }
    }
}

/// `(Delta, cal_y)` with the saved `psi` in place of `eta0`.
pub fn switched_outputs(state: &SwitchedDtState, gains: &DtGains) -> Result<ScalarRegression> {
    outputs_with(&state.eta_hat, &state.f, 1.0, gains.f0(), &state.psi)
}

pub fn switched_step(
    state: &SwitchedDtState,
    sample: &RegressionSample,
    gains: &DtGains,
    schedule: &SwitchSchedule,
    map: &MonotoneMap,
) -> Result<SwitchedDtState> {
    if gains.beta() != 1.0 {
        return Err(Error::InvalidGain {
            name: "beta",
            bound: "beta = 1 for the resetting estimator",
            value: gains.beta(),
        });
    }
    check_shapes(&state.eta_hat, &state.f, &state.theta_hat, map)?;
    if state.psi.len() != state.eta_hat.len() {
        return Err(Error::dim("psi", state.eta_hat.len(), state.psi.len()));
    }
    sample.validate(state.eta_hat.len())?;

    let sr = switched_outputs(state, gains)?;
    let (eta_hat, mut f) = ls_update(&state.eta_hat, &state.f, sample, 1.0, state.k)?;
    let mut psi = state.psi.clone();
    if schedule.is_reset(state.k) {
        let p = eta_hat.len();
        f = DMatrix::identity(p, p) / gains.f0();
        psi = eta_hat.clone();
    }
    let residual = &sr.cal_y - map.evaluate(&state.theta_hat)? * sr.delta;
    let theta_hat = &state.theta_hat + map.mixing() * residual * gains.update_weight(sr.delta);
    if !all_finite_vec(&theta_hat) {
        return Err(Error::NonFinite("theta_hat after step"));
    }
    Ok(SwitchedDtState { eta_hat, f, z: 1.0, theta_hat, k: state.k + 1, eta0: state.eta0.clone(), psi })
}
