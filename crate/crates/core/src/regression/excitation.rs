//! Interval-excitation and identifiability tests.
//!
//! Both reduce to the numerical rank of a stacked regressor matrix `S` whose
//! Gram `S S^T` is the excitation integral (or sum). Working on `S` instead of
//! the Gram keeps the two tests on one rank rule: a direction counts when
//! `sigma_i / sigma_max > 1e-10`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::numerical_rank;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationReport {
    pub excited: bool,
    /// Smallest eigenvalue of the Gram accumulation, reported as 0 when the
    /// Gram is numerically singular.
    pub level: f64,
    /// `t_c` (CT) or `k_c` (DT) of the window that was tested.
    pub window_end: f64,
}

fn report(stacked: &DMatrix<f64>, window_end: f64) -> ExcitationReport {
    let (rank, sigma_min, _) = numerical_rank(stacked);
    let excited = rank == stacked.nrows() && stacked.ncols() >= stacked.nrows();
    ExcitationReport { excited, level: if excited { sigma_min * sigma_min } else { 0.0 }, window_end }
}

fn stack(columns: &[DVector<f64>], p: usize) -> Result<DMatrix<f64>> {
    let mut s = DMatrix::zeros(p, columns.len());
    for (j, c) in columns.iter().enumerate() {
        if c.len() != p {
            return Err(Error::dim("regressor sequence", p, c.len()));
        }
        if !crate::linalg::all_finite_vec(c) {
            return Err(Error::NonFinite("regressor sequence"));
        }
        s.set_column(j, c);
    }
    Ok(s)
}

/// Tests `sum_{j=0}^{k_c} phi_j phi_j^T >= C_d I`.
pub fn ie_check_dt(phis: &[DVector<f64>], k_c: usize) -> Result<ExcitationReport> {
    let first = phis.first().ok_or_else(|| Error::Config("empty regressor sequence".into()))?;
    if k_c >= phis.len() {
        return Err(Error::Config(format!("k_c = {k_c} is outside a sequence of length {}", phis.len())));
    }
    let s = stack(&phis[..=k_c], first.len())?;
    Ok(report(&s, k_c as f64))
}

/// Tests `int_0^{t_c} phi phi^T ds >= C_c I` for a trajectory sampled at
/// `t = 0, h, 2h, ...`, by trapezoidal quadrature. A `t_c` between grid
/// points closes the last panel with a linearly interpolated sample.
pub fn ie_check_ct(trajectory: &[DVector<f64>], h: f64, t_c: f64) -> Result<ExcitationReport> {
    if !(h > 0.0) {
        return Err(Error::InvalidGain { name: "h", bound: "h > 0", value: h });
    }
    let first = trajectory.first().ok_or_else(|| Error::Config("empty regressor trajectory".into()))?;
    let p = first.len();
    let span = (trajectory.len() - 1) as f64 * h;
    if !(t_c >= 0.0) || t_c > span * (1.0 + 1e-12) {
        return Err(Error::Config(format!("t_c = {t_c} exceeds the trajectory span {span}")));
    }

    let mut full = (t_c / h + 1e-9).floor() as usize;
    full = full.min(trajectory.len() - 1);
    let frac = (t_c - full as f64 * h).max(0.0);

    // trapezoid weights on the full panels, each column scaled by sqrt(w)
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(full + 2);
    for j in 0..=full {
        let mut w = if j == 0 || j == full { 0.5 * h } else { h };
        if full == 0 {
            w = 0.0;
        }
        if j == full && frac > 0.0 {
            w += 0.5 * frac;
        }
        cols.push(&trajectory[j] * w.sqrt());
    }
    if frac > 0.0 && full + 1 < trajectory.len() {
        let s = frac / h;
        let end = &trajectory[full] * (1.0 - s) + &trajectory[full + 1] * s;
        cols.push(end * (0.5 * frac).sqrt());
    }
    let s = stack(&cols, p)?;
    Ok(report(&s, t_c))
}

/// True iff some `q` of the samples are linearly independent, i.e. the
/// stacked matrix `[phi(t_1) | ... | phi(t_n)]` has numerical rank `q`.
pub fn identifiability_check(samples: &[DVector<f64>]) -> bool {
    let Some(first) = samples.first() else {
        return false;
    };
    let q = first.len();
    if samples.len() < q {
        return false;
    }
    match stack(samples, q) {
        Ok(s) => numerical_rank(&s).0 == q,
        Err(_) => false,
    }
}
