//! Classical regressor extensions `Y = H[y]`, `Phi = [H[phi_1] | ... | H[phi_p]]`
//! with `H` realized as `dU/dt = A U + b u`, `A = diag(-a_i)`.
//!
//! The filters are advanced by their exact discretization under a
//! zero-order hold of the sample over the step, so the linearity identity
//! `Y = Phi g` is preserved to rounding error.

use nalgebra::{DMatrix, DVector};

use super::{mix, RegressionSample, ScalarRegression};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedRegression {
    pub y: DVector<f64>,
    pub phi: DMatrix<f64>,
}

impl ExtendedRegression {
    pub fn zeros(p: usize) -> Self {
        Self { y: DVector::zeros(p), phi: DMatrix::zeros(p, p) }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn mix(&self) -> Result<ScalarRegression> {
        mix(&self.y, &self.phi)
    }
}

fn validate_rates(a: &[f64]) -> Result<()> {
    for (i, &ai) in a.iter().enumerate() {
        if !(ai > 0.0 && ai.is_finite()) {
            return Err(Error::InvalidGain { name: "a_i", bound: "a_i > 0", value: ai });
        }
        if a[..i].contains(&ai) {
            return Err(Error::Config(format!("filter rate a_{} = {ai} is repeated", i + 1)));
        }
    }
    Ok(())
}

fn check_step(state: &ExtendedRegression, sample: &RegressionSample, p: usize, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGain { name: "h", bound: "h > 0", value: h });
    }
    if state.dim() != p || state.phi.shape() != (p, p) {
        return Err(Error::dim("extension state", p, state.dim()));
    }
    sample.validate(p)
}

/// Per-channel `(e^{-a h}, (1 - e^{-a h}) / a)`.
fn zoh(a: f64, h: f64) -> (f64, f64) {
    let decay = (-a * h).exp();
    (decay, -(-a * h).exp_m1() / a)
}

/// Lion's LTI extension: `b` constant with distinct entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LionFilter {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LionFilter {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::dim("Lion filter", a.len(), b.len()));
        }
        validate_rates(&a)?;
        for (i, &bi) in b.iter().enumerate() {
            if !bi.is_finite() {
                return Err(Error::NonFinite("Lion filter b"));
            }
            if b[..i].contains(&bi) {
                return Err(Error::Config(format!("filter gain b_{} = {bi} is repeated", i + 1)));
            }
        }
        Ok(Self { a, b })
    }

    /// `a_i = i`, `b_i = 1 / i`.
    pub fn with_defaults(p: usize) -> Self {
        let a = (1..=p).map(|i| i as f64).collect();
        let b = (1..=p).map(|i| 1.0 / i as f64).collect();
        Self { a, b }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn step(&self, state: &mut ExtendedRegression, sample: &RegressionSample, h: f64) -> Result<()> {
        let p = self.dim();
        check_step(state, sample, p, h)?;
        for i in 0..p {
            let (decay, gain) = zoh(self.a[i], h);
            state.y[i] = decay * state.y[i] + gain * self.b[i] * sample.y;
            for j in 0..p {
                state.phi[(i, j)] = decay * state.phi[(i, j)] + gain * self.b[i] * sample.phi[j];
            }
        }
        Ok(())
    }
}

/// Kreisselmeier's LTV extension: `b(t) = phi(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KreisselmeierFilter {
    a: Vec<f64>,
}

impl KreisselmeierFilter {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        for &ai in &a {
            if !(ai > 0.0 && ai.is_finite()) {
                return Err(Error::InvalidGain { name: "a_i", bound: "a_i > 0", value: ai });
            }
        }
        Ok(Self { a })
    }

    pub fn with_defaults(p: usize) -> Self {
        Self { a: (1..=p).map(|i| i as f64).collect() }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn step(&self, state: &mut ExtendedRegression, sample: &RegressionSample, h: f64) -> Result<()> {
        let p = self.dim();
        check_step(state, sample, p, h)?;
        for i in 0..p {
            let (decay, gain) = zoh(self.a[i], h);
            let bi = sample.phi[i];
            state.y[i] = decay * state.y[i] + gain * bi * sample.y;
            for j in 0..p {
                state.phi[(i, j)] = decay * state.phi[(i, j)] + gain * bi * sample.phi[j];
            }
        }
        Ok(())
    }
}

pub fn lion_extension_step(
    state: &mut ExtendedRegression,
    sample: &RegressionSample,
    a: &[f64],
    b: &[f64],
    h: f64,
) -> Result<()> {
    LionFilter::new(a.to_vec(), b.to_vec())?.step(state, sample, h)
}

pub fn kreisselmeier_extension_step(
    state: &mut ExtendedRegression,
    sample: &RegressionSample,
    a: &[f64],
    h: f64,
) -> Result<()> {
    KreisselmeierFilter::new(a.to_vec())?.step(state, sample, h)
}
