//! Indirect pole placement for a second-order ARX model.
//!
//! The model `A(q^-1) y = B(q^-1) u` with `A = 1 + a1 q^-1 + a2 q^-2`,
//! `B = b1 q^-1 + b2 q^-2` is closed with `R u = -S y + c4 r`, where
//! `R = 1 + r1 q^-1` and `S = s0 + s1 q^-1`, so that `A R + B S` matches the
//! desired third-order polynomial.

use nalgebra::{Complex, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};

pub const COND_LIMIT: f64 = 1e8;
pub const DC_LIMIT: f64 = 1e-9;

/// Feedback law `u_k = c1 y_k + c2 y_{k-1} + c3 u_{k-1} + c4 r_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controller {
    pub c: [f64; 4],
    /// False when the design was ill-conditioned; `c` is then all zeros.
    pub ok: bool,
}

impl Controller {
    pub fn control(&self, y: f64, y_prev: f64, u_prev: f64, r: f64) -> f64 {
        if !self.ok {
            return 0.0;
        }
        self.c[0] * y + self.c[1] * y_prev + self.c[2] * u_prev + self.c[3] * r
    }
}

/// Coefficients `(d1, d2, d3)` of `prod (1 - p_i q^-1)`.
pub fn desired_polynomial(poles: &[Complex<f64>]) -> Result<[f64; 3]> {
    if poles.len() != 3 {
        return Err(Error::dim("desired poles", 3, poles.len()));
    }
    let mut coeffs = vec![Complex::new(1.0, 0.0)];
    for p in poles {
        let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * p;
        }
        coeffs = next;
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let residue = coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if residue > 1e-9 * scale {
        return Err(Error::Conjugation(residue));
    }
    Ok([coeffs[1].re, coeffs[2].re, coeffs[3].re])
}

/// Controller for the model `theta_hat = (a1, a2, b1, b2)`.
pub fn pole_placement(theta_hat: &DVector<f64>, poles: &[Complex<f64>]) -> Result<Controller> {
    if theta_hat.len() != 4 {
        return Err(Error::dim("pole placement model", 4, theta_hat.len()));
    }
    let d = desired_polynomial(poles)?;
    let (a1, a2, b1, b2) = (theta_hat[0], theta_hat[1], theta_hat[2], theta_hat[3]);
    let off = Controller { c: [0.0; 4], ok: false };
    if !theta_hat.iter().all(|x| x.is_finite()) || (b1 + b2).abs() < DC_LIMIT {
        return Ok(off);
    }
    let s = Matrix3::new(1.0, b1, 0.0, a1, b2, b1, a2, 0.0, b2);
    let sv = s.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smin == 0.0 || smax / smin > COND_LIMIT {
        return Ok(off);
    }
    let rhs = Vector3::new(d[0] - a1, d[1] - a2, d[2]);
    let Some(sol) = s.lu().solve(&rhs) else {
        return Ok(off);
    };
    let (r1, s0, s1) = (sol[0], sol[1], sol[2]);
    let c4 = (1.0 + d[0] + d[1] + d[2]) / (b1 + b2);
    Ok(Controller { c: [-s0, -s1, -r1, c4], ok: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conjugation_is_enforced() {
        let bad = [Complex::new(0.5, 0.2), Complex::new(0.5, 0.2), Complex::new(0.1, 0.0)];
        assert!(matches!(desired_polynomial(&bad), Err(Error::Conjugation(_))));
        let good = [Complex::new(0.5, 0.2), Complex::new(0.5, -0.2), Complex::new(0.1, 0.0)];
        let d = desired_polynomial(&good).unwrap();
        assert_relative_eq!(d[0], -1.1, epsilon = 1e-15);
    }

    #[test]
    fn zero_input_gain_disables_control() {
        let th = DVector::from_vec(vec![0.5, -0.1, 0.0, 0.0]);
        let poles = [Complex::new(0.0, 0.0); 3];
        let c = pole_placement(&th, &poles).unwrap();
        assert!(!c.ok);
        assert_eq!(c.control(1.0, 2.0, 3.0, 1.0), 0.0);
    }
}
