//! Property suites behind `relaxls check <suite>`.
//!
//! Each suite runs a handful of randomized or scenario-based checks of the
//! estimator invariants and reports the worst value seen against its
//! tolerance.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ct::{self, CtEstimatorState, ExtState};
use crate::dt::{self, DtEstimatorState, DtGains};
use crate::error::{Error, Result};
use crate::regression::{
    adjugate, check_lipschitz, check_monotonicity, identifiability_check, ie_check_dt, MonotoneMap, RegressionSample,
    SampleBox,
};
use crate::scenarios::{
    example5::{reduced_map, Example5Sampler},
    regressor_trajectory, run_scenario, ScenarioConfig, ScenarioKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Monotonicity,
    Excitation,
    Robustness,
    Equivalence,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Identities, Suite::Monotonicity, Suite::Excitation, Suite::Robustness, Suite::Equivalence];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Monotonicity => "monotonicity",
            Suite::Excitation => "excitation",
            Suite::Robustness => "robustness",
            Suite::Equivalence => "equivalence",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub passed: bool,
    pub items: Vec<CheckItem>,
}

fn below(name: &str, worst: f64, tolerance: f64) -> CheckItem {
    CheckItem { name: name.into(), passed: worst <= tolerance, worst, tolerance }
}

fn above(name: &str, worst: f64, tolerance: f64) -> CheckItem {
    CheckItem { name: name.into(), passed: worst >= tolerance, worst, tolerance }
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, a: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-a..a))
}

fn uniform_mat(rng: &mut ChaCha8Rng, r: usize, c: usize, a: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-a..a))
}

/// A random linear parameterization `G = L theta` with `Q = L^T / |L|^2`.
fn random_problem(rng: &mut ChaCha8Rng, p: usize, q: usize) -> Result<(MonotoneMap, DVector<f64>)> {
    let l = uniform_mat(rng, p, q, 1.0) + DMatrix::identity(p, q);
    let scale = l.norm_squared();
    let map = MonotoneMap::linear(l.clone(), l.transpose() / scale, 1e-3, 1.0)?;
    Ok((map, uniform_vec(rng, q, 2.0)))
}

fn dt_identities() -> Result<Vec<CheckItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut ext, mut inv) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let p = rng.random_range(1..=5);
        let q = rng.random_range(1..=p);
        let (map, theta) = random_problem(&mut rng, p, q)?;
        let g_theta = map.evaluate(&theta)?;
        let gains = DtGains::new(rng.random_range(0.1..10.0), rng.random_range(0.8..=1.0), 0.1)?;
        let mut s = DtEstimatorState::new(uniform_vec(&mut rng, p, 1.0), DVector::zeros(q), &gains);
        for k in 0..200 {
            let zf = &s.f * (gains.f0() * s.z);
            let lhs = (DMatrix::identity(p, p) - &zf) * &g_theta;
            let rhs = &s.eta_hat - &zf * &s.eta0;
            ext = ext.max((lhs - rhs).norm());
            let phi = uniform_vec(&mut rng, p, 1.0);
            let sample = RegressionSample::new(k as f64, phi.clone(), phi.dot(&g_theta));
            let next = dt::dt_step(&s, &sample, &gains, &map)?;
            let (Some(fi), Some(fi_prev)) = (next.f.clone().try_inverse(), s.f.clone().try_inverse()) else {
                return Err(Error::LostDefiniteness { step: k });
            };
            let expected = fi_prev * gains.beta() + &phi * phi.transpose();
            inv = inv.max((&fi - &expected).norm() / fi.norm());
            s = next;
        }
    }
    Ok(vec![below("dt_extended_identity", ext, 1e-10), below("dt_inverse_recursion", inv, 1e-10)])
}

fn adjugate_identity() -> Result<CheckItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=5);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-9i32..=9) as f64);
        let (adj, det) = adjugate(&a)?;
        let target = DMatrix::identity(n, n) * det;
        worst = worst.max((&adj * &a - &target).amax()).max((&a * &adj - &target).amax());
    }
    Ok(below("adjugate_identity", worst, 1e-6))
}

/// `|F^-1 (eta_hat - G) - z f0 (eta0 - G)|` along the default continuous run.
fn ct_ls_identity(seconds: f64) -> Result<CheckItem> {
    let cfg = ScenarioConfig::defaults(ScenarioKind::Example5);
    let gains = cfg.ct_gains()?;
    let theta = DVector::from_column_slice(&cfg.true_theta[0]);
    let mut sampler = Example5Sampler::new([theta[0], theta[1], theta[2]], cfg.filter_lambda, cfg.input);
    let mut s = CtEstimatorState::new(DVector::from_column_slice(&cfg.eta0), DVector::zeros(3), &gains);
    let mut worst = 0.0f64;
    let n = (seconds / cfg.step).round() as usize;
    for _ in 0..n {
        s = ct::ct_linear_step(&s, &mut sampler, &gains, cfg.step)?;
        let fi = s.f.clone().try_inverse().ok_or(Error::LostDefiniteness { step: 0 })?;
        let r = fi * (&s.eta_hat - &theta) - (&s.eta0 - &theta) * (s.z * gains.f0());
        worst = worst.max(r.norm());
    }
    Ok(below("ct_ls_identity", worst, 1e-6))
}

fn monotonicity_suite() -> Result<Vec<CheckItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst_increase = 0.0f64;
    for _ in 0..20 {
        let q = rng.random_range(1..=5);
        let theta = uniform_vec(&mut rng, q, 2.0);
        let gains = DtGains::new(rng.random_range(0.1..5.0), 1.0, rng.random_range(0.1..1.0))?;
        let mut s = DtEstimatorState::new(uniform_vec(&mut rng, q, 1.0), DVector::zeros(q), &gains);
        let mut prev = (&s.theta_hat - &theta).abs();
        for k in 0..100 {
            let phi = uniform_vec(&mut rng, q, 1.0);
            let sample = RegressionSample::new(k as f64, phi.clone(), phi.dot(&theta));
            s = dt::dt_linear_step(&s, &sample, &gains)?;
            let err = (&s.theta_hat - &theta).abs();
            worst_increase = worst_increase.max((&err - &prev).max());
            prev = err;
        }
    }
    let map = reduced_map()?;
    let mono = check_monotonicity(&map, 200, SampleBox::default(), 1)?;
    let lip = check_lipschitz(&map, 200, SampleBox::default(), 2)?;
    Ok(vec![
        below("componentwise_error_monotone", worst_increase, 1e-12),
        above("reduced_map_monotone", mono.worst, map.rho()),
        below("reduced_map_lipschitz", lip.worst, map.nu() * (1.0 + 1e-12)),
    ])
}

fn excitation_suite() -> Result<Vec<CheckItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut disagreements = 0usize;
    for i in 0..50 {
        let q = rng.random_range(1..=4);
        let n = rng.random_range(1..=6);
        let rank = rng.random_range(0..=q);
        let basis = uniform_mat(&mut rng, q, rank.max(1), 1.0);
        let samples: Vec<DVector<f64>> = (0..n)
            .map(|_| if rank == 0 { DVector::zeros(q) } else { &basis * uniform_vec(&mut rng, rank, 1.0) })
            .collect();
        let ie = ie_check_dt(&samples, n - 1)?;
        if ie.excited != identifiability_check(&samples) || ie.excited != (ie.level > 0.0) {
            disagreements += 1;
        }
        let _ = i;
    }
    let cfg = ScenarioConfig::defaults(ScenarioKind::Example8);
    let (phis, _) = regressor_trajectory(&cfg)?;
    let first = ie_check_dt(&phis[..50], 49)?.level;
    let second = ie_check_dt(&phis[50..], phis.len() - 51)?.level;
    Ok(vec![
        below("lemma1_agreement_failures", disagreements as f64, 0.0),
        above("switched_first_interval_excitation", first, f64::MIN_POSITIVE),
        above("switched_second_interval_excitation", second, f64::MIN_POSITIVE),
    ])
}

fn robustness_suite() -> Result<Vec<CheckItem>> {
    let mut cfg = ScenarioConfig::defaults(ScenarioKind::Example4);
    cfg.horizon = 10_000.0;
    cfg.disturbance.amplitude = 0.1;
    cfg.disturbance.seed = 3;
    let trace = run_scenario(&cfg)?.remove(0);
    let failed = trace.failure.is_some() as u8 as f64;
    let norms: Vec<f64> = trace.records.iter().map(|r| r.err_norm.max(r.f_norm)).collect();
    let global = norms.iter().cloned().fold(0.0, f64::max);
    let cut = norms.len() * 9 / 10;
    let early = norms[..cut].iter().cloned().fold(0.0, f64::max);
    let late = norms[cut..].iter().cloned().fold(0.0, f64::max);
    Ok(vec![
        below("run_completed_failures", failed, 0.0),
        below("state_bound", global, 1e6),
        below("late_over_early_ratio", late / early.max(f64::MIN_POSITIVE), 1.25),
    ])
}

fn equivalence_suite(seconds: f64) -> Result<Vec<CheckItem>> {
    let cfg = ScenarioConfig::defaults(ScenarioKind::Example5);
    let gains = cfg.ct_gains()?;
    let map = MonotoneMap::identity(3);
    let theta = DVector::from_column_slice(&cfg.true_theta[0]);
    let eta0 = DVector::from_column_slice(&cfg.eta0);
    let mut sampler = Example5Sampler::new([theta[0], theta[1], theta[2]], cfg.filter_lambda, cfg.input);
    let mut a = CtEstimatorState::new(eta0.clone(), DVector::zeros(3), &gains);
    let mut b = ExtState::new(3, DVector::zeros(3), &gains);
    let (mut coord, mut est) = (0.0f64, 0.0f64);
    let n = (seconds / cfg.step).round() as usize;
    for _ in 0..n {
        a = ct::ct_step(&a, &mut sampler, &gains, &map, cfg.step)?;
        b = ct::ext_step(&b, &mut sampler, &gains, &map, cfg.step)?;
        let (y, phi) = ct::to_extension_coords(&a.eta_hat, &a.f, a.z, gains.f0(), &eta0)?;
        coord = coord.max((y - &b.y).amax()).max((phi - &b.phi).amax());
        est = est.max((&a.theta_hat - &b.theta_hat).amax());
    }
    Ok(vec![below("extension_coordinates", coord, 1e-6), below("extension_estimates", est, 1e-6)])
}

pub fn run_check(suite: Suite) -> Result<CheckReport> {
    let items = match suite {
        Suite::Identities => {
            let mut v = dt_identities()?;
            v.push(adjugate_identity()?);
            v.push(ct_ls_identity(3.0)?);
            v
        }
        Suite::Monotonicity => monotonicity_suite()?,
        Suite::Excitation => excitation_suite()?,
        Suite::Robustness => robustness_suite()?,
        Suite::Equivalence => equivalence_suite(3.0)?,
    };
    Ok(CheckReport { suite: suite.name().into(), passed: items.iter().all(|i| i.passed), items })
}
