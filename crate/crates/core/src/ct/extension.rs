//! Dynamic-extension form of the continuous-time estimator.
//!
//! Instead of `eta_hat`, the filter states `Y` and `Phi` of the extended
//! regression `Y = Phi G(theta)` are integrated directly. The two forms are
//! related by `Y = eta_hat - z f0 F eta0`, `Phi = I - z f0 F`.

use nalgebra::{DMatrix, DVector};

use super::{CtGains, Sampler, Z_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{all_finite_mat, all_finite_vec, sym_norm, symmetrize};
use crate::regression::{mix, MonotoneMap, RegressionSample};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtState {
    pub y: DVector<f64>,
    pub phi: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub z: f64,
    pub theta_hat: DVector<f64>,
    pub t: f64,
}

impl ExtState {
    /// `Y(0) = 0`, `Phi(0) = 0`, `F(0) = I / f0`, `z(0) = 1`.
    pub fn new(p: usize, theta0: DVector<f64>, gains: &CtGains) -> Self {
        Self {
            y: DVector::zeros(p),
            phi: DMatrix::zeros(p, p),
            f: DMatrix::identity(p, p) / gains.f0(),
            z: 1.0,
            theta_hat: theta0,
            t: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtDerivative {
    pub y: DVector<f64>,
    pub phi: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub z: f64,
    pub theta_hat: DVector<f64>,
}

pub fn ext_derivatives(
    state: &ExtState,
    sample: &RegressionSample,
    gains: &CtGains,
    map: &MonotoneMap,
) -> Result<ExtDerivative> {
    let p = state.y.len();
    if state.phi.shape() != (p, p) || state.f.shape() != (p, p) {
        return Err(Error::dim("extension state", format!("{p}x{p}"), format!("{:?}", state.phi.shape())));
    }
    if map.dim_g() != p {
        return Err(Error::dim("G(theta) vs Y", p, map.dim_g()));
    }
    if !all_finite_vec(&state.y) || !all_finite_mat(&state.phi) || !all_finite_mat(&state.f) {
        return Err(Error::NonFinite("extension state"));
    }
    sample.validate(p)?;
    let reg = &sample.phi;
    let beta = gains.forgetting(sym_norm(&state.f));

    // A = -alpha F phi phi^T, b = alpha F phi
    let b = &state.f * reg * gains.alpha();
    let a = -(&b * reg.transpose());

    let d_y = &a * &state.y + &b * sample.y;
    let d_phi = &a * &state.phi + &b * reg.transpose();
    let f_phi = &state.f * reg;
    let d_f = &f_phi * f_phi.transpose() * (-gains.alpha()) + &state.f * beta;

    let sr = mix(&state.y, &state.phi)?;
    let residual = &sr.cal_y - map.evaluate(&state.theta_hat)? * sr.delta;
    let d_theta = map.mixing() * residual * (gains.gamma() * sr.delta);

    Ok(ExtDerivative { y: d_y, phi: d_phi, f: d_f, z: -beta * state.z, theta_hat: d_theta })
}

fn advance(s: &ExtState, d: &ExtDerivative, h: f64, t: f64) -> ExtState {
    ExtState {
        y: &s.y + &d.y * h,
        phi: &s.phi + &d.phi * h,
        f: &s.f + &d.f * h,
        z: s.z + d.z * h,
        theta_hat: &s.theta_hat + &d.theta_hat * h,
        t,
    }
}

/// One RK4 step of the extension form, sampling exactly like `ct_step`.
pub fn ext_step<S: Sampler + ?Sized>(
    state: &ExtState,
    sampler: &mut S,
    gains: &CtGains,
    map: &MonotoneMap,
    h: f64,
) -> Result<ExtState> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidGain { name: "h", bound: "h > 0", value: h });
    }
    let t = state.t;
    let s0 = sampler.sample(t);
    let s_mid = sampler.sample(t + 0.5 * h);
    let s1 = sampler.sample(t + h);
    let k1 = ext_derivatives(state, &s0, gains, map)?;
    let k2 = ext_derivatives(&advance(state, &k1, 0.5 * h, t + 0.5 * h), &s_mid, gains, map)?;
    let k3 = ext_derivatives(&advance(state, &k2, 0.5 * h, t + 0.5 * h), &s_mid, gains, map)?;
    let k4 = ext_derivatives(&advance(state, &k3, h, t + h), &s1, gains, map)?;
    let w = h / 6.0;
    let mut f = &state.f + (&k1.f + &k2.f * 2.0 + &k3.f * 2.0 + &k4.f) * w;
    symmetrize(&mut f);
    let next = ExtState {
        y: &state.y + (&k1.y + &k2.y * 2.0 + &k3.y * 2.0 + &k4.y) * w,
        phi: &state.phi + (&k1.phi + &k2.phi * 2.0 + &k3.phi * 2.0 + &k4.phi) * w,
        f,
        z: (state.z + (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z) * w).clamp(Z_FLOOR, 1.0),
        theta_hat: &state.theta_hat + (&k1.theta_hat + &k2.theta_hat * 2.0 + &k3.theta_hat * 2.0 + &k4.theta_hat) * w,
        t: t + h,
    };
    if !all_finite_vec(&next.y) || !all_finite_mat(&next.phi) || !all_finite_vec(&next.theta_hat) {
        return Err(Error::NonFinite("extension state after step"));
    }
    Ok(next)
}

fn check_z(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGain { name: "z", bound: "z > 0", value: z })
    }
}

/// `(eta_hat, F, z) -> (Y, Phi)`.
pub fn to_extension_coords(
    eta_hat: &DVector<f64>,
    f: &DMatrix<f64>,
    z: f64,
    f0: f64,
    eta0: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_z(z)?;
    let p = eta_hat.len();
    if f.shape() != (p, p) || eta0.len() != p {
        return Err(Error::dim("coordinate change", p, eta0.len()));
    }
    let zf = f * (z * f0);
    Ok((eta_hat - &zf * eta0, DMatrix::identity(p, p) - zf))
}

/// `(Y, Phi, z) -> (eta_hat, F)`.
pub fn from_extension_coords(
    y: &DVector<f64>,
    phi: &DMatrix<f64>,
    z: f64,
    f0: f64,
    eta0: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_z(z)?;
    let p = y.len();
    if phi.shape() != (p, p) || eta0.len() != p {
        return Err(Error::dim("coordinate change", p, eta0.len()));
    }
    let i_minus = DMatrix::identity(p, p) - phi;
    let eta_hat = y + &i_minus * eta0;
    Ok((eta_hat, i_minus / (z * f0)))
}
