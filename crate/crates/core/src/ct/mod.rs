//! Continuous-time LS + DREM interlaced estimator with a bounded,
//! time-varying forgetting factor.
//!
//! The state is integrated with fixed-step classical RK4. `Delta` and `cal_y`
//! are recomputed at every stage point since they are instantaneous functions
//! of `(eta_hat, F, z)`.

mod extension;

pub use extension::{ext_derivatives, ext_step, from_extension_coords, to_extension_coords, ExtDerivative, ExtState};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{all_finite_mat, all_finite_vec, sym_norm, symmetrize};
use crate::regression::{mix, MonotoneMap, RegressionSample, ScalarRegression};

/// Lower clip applied to `z` after each step so it never underflows to 0.
pub const Z_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtGains {
    alpha: f64,
    f0: f64,
    beta0: f64,
    m_bound: f64,
    gamma: f64,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGain {
            name,
            bound: match name {
                "alpha" => "alpha > 0",
                "f0" => "f0 > 0",
                "beta0" => "beta0 > 0",
                _ => "gamma > 0",
            },
            value,
        })
    }
}

impl CtGains {
    pub fn new(alpha: f64, f0: f64, beta0: f64, m_bound: f64, gamma: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("f0", f0)?;
        positive("beta0", beta0)?;
        positive("gamma", gamma)?;
        if !(m_bound * f0 >= 1.0) || !m_bound.is_finite() {
            return Err(Error::InvalidGain { name: "m_bound", bound: "m_bound >= 1/f0", value: m_bound });
        }
        Ok(Self { alpha, f0, beta0, m_bound, gamma })
    }

    /// Same as [`CtGains::new`] with `M = 100 / f0`.
    pub fn with_default_bound(alpha: f64, f0: f64, beta0: f64, gamma: f64) -> Result<Self> {
        positive("f0", f0)?;
        Self::new(alpha, f0, beta0, 100.0 / f0, gamma)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn f0(&self) -> f64 {
        self.f0
    }
    pub fn beta0(&self) -> f64 {
        self.beta0
    }
    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `beta0 (1 - |F| / M)`, floored at zero.
    pub fn forgetting(&self, f_norm: f64) -> f64 {
        (self.beta0 * (1.0 - f_norm / self.m_bound)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtEstimatorState {
    pub eta_hat: DVector<f64>,
    pub f: DMatrix<f64>,
    pub z: f64,
    pub theta_hat: DVector<f64>,
    pub t: f64,
    /// `eta_hat(0)`, kept because the mixing step refers back to it.
    pub eta0: DVector<f64>,
}

impl CtEstimatorState {
    /// Initial state `F(0) = I / f0`, `z(0) = 1`, `t = 0`.
    pub fn new(eta0: DVector<f64>, theta0: DVector<f64>, gains: &CtGains) -> Self {
        let p = eta0.len();
        Self { f: DMatrix::identity(p, p) / gains.f0, eta_hat: eta0.clone(), z: 1.0, theta_hat: theta0, t: 0.0, eta0 }
    }

    pub fn dim_p(&self) -> usize {
        self.eta_hat.len()
    }

    fn check(&self, map: &MonotoneMap) -> Result<()> {
        let p = self.eta_hat.len();
        if self.f.shape() != (p, p) {
            return Err(Error::dim("F", format!("{p}x{p}"), format!("{}x{}", self.f.nrows(), self.f.ncols())));
        }
        if self.eta0.len() != p {
            return Err(Error::dim("eta0", p, self.eta0.len()));
        }
        if map.dim_g() != p {
            return Err(Error::dim("G(theta) vs eta_hat", p, map.dim_g()));
        }
        if self.theta_hat.len() != map.dim_theta() {
            return Err(Error::dim("theta_hat", map.dim_theta(), self.theta_hat.len()));
        }
        if !all_finite_vec(&self.eta_hat)
            || !all_finite_mat(&self.f)
            || !all_finite_vec(&self.theta_hat)
            || !self.z.is_finite()
        {
            return Err(Error::NonFinite("estimator state"));
        }
        Ok(())
    }
}

/// Time derivative of every component of [`CtEstimatorState`].
#[derive(Debug, Clone, PartialEq)]
pub struct CtDerivative {
    pub eta_hat: DVector<f64>,
    pub f: DMatrix<f64>,
    pub z: f64,
    pub theta_hat: DVector<f64>,
    /// Forgetting factor at the evaluation point.
    pub beta: f64,
}

/// Source of regression data for the integrator.
pub trait Sampler {
    fn sample(&mut self, t: f64) -> RegressionSample;
}

impl<F: FnMut(f64) -> RegressionSample> Sampler for F {
    fn sample(&mut self, t: f64) -> RegressionSample {
        self(t)
    }
}

/// `(Delta, cal_y)` from `Phi = I - z f0 F` and `Y = eta_hat - z f0 F eta0`.
pub fn ct_scalar_outputs(state: &CtEstimatorState, gains: &CtGains) -> Result<ScalarRegression> {
    let p = state.dim_p();
    let zf = &state.f * (state.z * gains.f0);
    let phi = DMatrix::identity(p, p) - &zf;
    let y = &state.eta_hat - &zf * &state.eta0;
    mix(&y, &phi)
}

pub fn ct_derivatives(
    state: &CtEstimatorState,
    sample: &RegressionSample,
    gains: &CtGains,
    map: &MonotoneMap,
) -> Result<CtDerivative> {
    state.check(map)?;
    sample.validate(state.dim_p())?;
    let phi = &sample.phi;
    let beta = gains.forgetting(sym_norm(&state.f));

    let f_phi = &state.f * phi;
    let err = sample.y - phi.dot(&state.eta_hat);
    let d_eta = &f_phi * (gains.alpha * err);
    let d_f = &f_phi * f_phi.transpose() * (-gains.alpha) + &state.f * beta;

    let sr = ct_scalar_outputs(state, gains)?;
    let residual = &sr.cal_y - map.evaluate(&state.theta_hat)? * sr.delta;
    let d_theta = map.mixing() * residual * (gains.gamma * sr.delta);

    Ok(CtDerivative { eta_hat: d_eta, f: d_f, z: -beta * state.z, theta_hat: d_theta, beta })
}

fn advance(state: &CtEstimatorState, d: &CtDerivative, h: f64, t: f64) -> CtEstimatorState {
    CtEstimatorState {
        eta_hat: &state.eta_hat + &d.eta_hat * h,
        f: &state.f + &d.f * h,
        z: state.z + d.z * h,
        theta_hat: &state.theta_hat + &d.theta_hat * h,
        t,
        eta0: state.eta0.clone(),
    }
}

/// One classical RK4 step of length `h`.
pub fn ct_step<S: Sampler + ?Sized>(
    state: &CtEstimatorState,
    sampler: &mut S,
    gains: &CtGains,
    map: &MonotoneMap,
    h: f64,
) -> Result<CtEstimatorState> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidGain { name: "h", bound: "h > 0", value: h });
    }
    let t = state.t;
    let s0 = sampler.sample(t);
    let s_mid = sampler.sample(t + 0.5 * h);
    let s1 = sampler.sample(t + h);

    let k1 = ct_derivatives(state, &s0, gains, map)?;
    let k2 = ct_derivatives(&advance(state, &k1, 0.5 * h, t + 0.5 * h), &s_mid, gains, map);
    let k2 = blowup(k2, state)?;
    let k3 = ct_derivatives(&advance(state, &k2, 0.5 * h, t + 0.5 * h), &s_mid, gains, map);
    let k3 = blowup(k3, state)?;
    let k4 = ct_derivatives(&advance(state, &k3, h, t + h), &s1, gains, map);
    let k4 = blowup(k4, state)?;

    let w = h / 6.0;
    let mut f = &state.f + (&k1.f + &k2.f * 2.0 + &k3.f * 2.0 + &k4.f) * w;
    symmetrize(&mut f);
    let next = CtEstimatorState {
        eta_hat: &state.eta_hat + (&k1.eta_hat + &k2.eta_hat * 2.0 + &k3.eta_hat * 2.0 + &k4.eta_hat) * w,
        f,
        z: (state.z + (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z) * w).clamp(Z_FLOOR, 1.0),
        theta_hat: &state.theta_hat + (&k1.theta_hat + &k2.theta_hat * 2.0 + &k3.theta_hat * 2.0 + &k4.theta_hat) * w,
        t: t + h,
        eta0: state.eta0.clone(),
    };
    if !all_finite_vec(&next.eta_hat) || !all_finite_mat(&next.f) || !all_finite_vec(&next.theta_hat) {
        return Err(Error::IntegrationBlowup { time: t + h, last_valid: Box::new(state.clone()) });
    }
    Ok(next)
}

// Non-finite intermediate stages are reported as a blowup of the step.
fn blowup<T>(r: Result<T>, state: &CtEstimatorState) -> Result<T> {
    match r {
        Err(Error::NonFinite(_)) => {
            Err(Error::IntegrationBlowup { time: state.t, last_valid: Box::new(state.clone()) })
        }
        other => other,
    }
}

/// [`ct_step`] for the linear parameterization `G(theta) = theta`, `Q = I`.
pub fn ct_linear_step<S: Sampler + ?Sized>(
    state: &CtEstimatorState,
    sampler: &mut S,
    gains: &CtGains,
    h: f64,
) -> Result<CtEstimatorState> {
    let map = MonotoneMap::identity(state.dim_p());
    ct_step(state, sampler, gains, &map, h)
}
