//! Sampling-based certificates for the monotonicity and Lipschitz
//! assumptions on `G`. A pass means no counterexample was found in the box.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MonotoneMap;
use crate::error::{Error, Result};
use crate::linalg::sym_eig_extremes;

const SLACK: f64 = 1e-12;

/// Axis-aligned sampling region `[lower, upper]^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub lower: f64,
    pub upper: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        Self { lower: -10.0, upper: 10.0 }
    }
}

impl SampleBox {
    fn draw(&self, rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
        DVector::from_fn(dim, |_, _| rng.random_range(self.lower..self.upper))
    }

    fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::Config(format!("sample box [{}, {}] is empty or unbounded", self.lower, self.upper)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub pass: bool,
    /// Smallest eigenvalue seen (monotonicity) or largest ratio seen (Lipschitz).
    pub worst: f64,
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    Ok(())
}

/// Worst-case minimum eigenvalue of `Q dG(theta) + dG(theta)^T Q^T` over
/// `n_samples` points drawn uniformly from `region`.
pub fn check_monotonicity(map: &MonotoneMap, n_samples: usize, region: SampleBox, seed: u64) -> Result<CheckOutcome> {
    check_samples(n_samples)?;
    region.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = map.mixing();
    let mut worst = f64::INFINITY;
    for _ in 0..n_samples {
        let theta = region.draw(&mut rng, map.dim_theta());
        let jac = map.jacobian_at(&theta)?;
        let qj = q * &jac;
        let sym = &qj + qj.transpose();
        if !crate::linalg::all_finite_mat(&sym) {
            return Err(Error::NonFinite("jacobian"));
        }
        worst = worst.min(sym_eig_extremes(&sym).0);
    }
    Ok(CheckOutcome { pass: worst >= map.rho() * (1.0 - SLACK), worst })
}

/// Worst-case `|G(a) - G(b)| / |a - b|` over `n_samples` random pairs.
pub fn check_lipschitz(map: &MonotoneMap, n_samples: usize, region: SampleBox, seed: u64) -> Result<CheckOutcome> {
    check_samples(n_samples)?;
    region.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let a = region.draw(&mut rng, map.dim_theta());
        let b = region.draw(&mut rng, map.dim_theta());
        let dist = (&a - &b).norm();
        if dist == 0.0 {
            continue;
        }
        let ratio = (map.evaluate(&a)? - map.evaluate(&b)?).norm() / dist;
        if !ratio.is_finite() {
            return Err(Error::NonFinite("G(theta)"));
        }
        worst = worst.max(ratio);
    }
    Ok(CheckOutcome { pass: worst <= map.nu() * (1.0 + SLACK), worst })
}
