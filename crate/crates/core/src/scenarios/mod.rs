//! Reproducible example scenarios and the runner that produces traces.

pub mod disturbance;
pub mod example4;
pub mod example5;
pub mod example8;
pub mod pole_placement;

pub use disturbance::{inject_disturbance, DisturbanceComponent, DisturbanceSource, DisturbanceSpec, RngKind};
pub use pole_placement::{desired_polynomial, pole_placement, Controller};

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{gradient_step_dt, rls_step_dt, GradientState, RlsState};
use crate::ct::{self, CtEstimatorState, CtGains, ExtState, Sampler};
use crate::dt::{self, DtEstimatorState, DtGains, Normalization, SwitchSchedule, SwitchedDtState};
use crate::error::{Error, Result};
use crate::io::TraceFormat;
use crate::linalg::sym_norm;
use crate::regression::{mix, MonotoneMap, RegressionSample};

use example4::Example4Plant;
use example5::Example5Sampler;
use example8::Example8Plant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Mass-spring-damper, linear parameterization, continuous time.
    Example5,
    /// Same plant, estimating only two parameters through `G`.
    Example5Nl,
    /// First-order discrete plant.
    Example4,
    /// Switched second-order plant under adaptive pole placement.
    Example8,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [Self::Example5, Self::Example5Nl, Self::Example4, Self::Example8];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Example5 => "example5",
            Self::Example5Nl => "example5_nl",
            Self::Example4 => "example4",
            Self::Example8 => "example8",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Self::Example5 | Self::Example5Nl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// The interlaced LS + DREM estimator (resetting variant on switched plants).
    Lsd,
    /// Continuous-time estimator in dynamic-extension coordinates.
    LsdExt,
    Gradient,
    Rls,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lsd => "lsd",
            Self::LsdExt => "lsd_ext",
            Self::Gradient => "gradient",
            Self::Rls => "rls",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainConfig {
    pub alpha: Option<f64>,
    pub f0: f64,
    pub beta0: Option<f64>,
    /// Defaults to `100 / f0` when absent.
    pub m_bound: Option<f64>,
    pub gamma: f64,
    pub beta: Option<f64>,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    /// Scalar multiple of the identity used as gradient gain.
    pub gradient_gain: f64,
    pub rls_forgetting: f64,
    /// Scalar multiple of the identity used as initial RLS covariance.
    pub rls_p0: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { gradient_gain: 1.0, rls_forgetting: 1.0, rls_p0: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub scenario: ScenarioKind,
    pub name: String,
    pub estimators: Vec<EstimatorKind>,
    /// One parameter vector per regime.
    pub true_theta: Vec<Vec<f64>>,
    /// Instants at which the next regime becomes active.
    pub switch_at: Vec<u64>,
    pub theta0: Vec<f64>,
    pub eta0: Vec<f64>,
    pub gains: GainConfig,
    /// Seconds for continuous-time scenarios, steps for discrete ones.
    pub horizon: f64,
    /// Integration step (continuous time only).
    pub step: f64,
    /// Constant plant input, or the reference for closed-loop scenarios.
    pub input: f64,
    pub filter_lambda: f64,
    /// Desired closed-loop poles as `(re, im)` pairs.
    pub poles: Vec<[f64; 2]>,
    /// Most recent first: `(y_{-1}, y_{-2}, ...)`.
    pub y_init: Vec<f64>,
    pub u_init: Vec<f64>,
    pub baseline: BaselineConfig,
    pub disturbance: DisturbanceSpec,
    pub output: Option<String>,
    pub format: TraceFormat,
}

impl ScenarioConfig {
    pub const SCHEMA: u32 = 1;

    pub fn defaults(kind: ScenarioKind) -> Self {
        let ct_gains = GainConfig {
            alpha: Some(20.3),
            f0: 4.0,
            beta0: Some(0.07),
            m_bound: None,
            gamma: 700.0,
            beta: None,
            normalization: Normalization::Unit,
        };
        let base = Self {
            schema: Self::SCHEMA,
            scenario: kind,
            name: kind.name().to_string(),
            estimators: vec![EstimatorKind::Lsd],
            true_theta: vec![vec![2.0, 3.0, 1.0]],
            switch_at: vec![],
            theta0: vec![0.0; 3],
            eta0: vec![0.1; 3],
            gains: ct_gains,
            horizon: 10.0,
            step: 1e-3,
            input: 5.0,
            filter_lambda: 1.0,
            poles: vec![],
            y_init: vec![],
            u_init: vec![],
            baseline: BaselineConfig::default(),
            disturbance: DisturbanceSpec::default(),
            output: None,
            format: TraceFormat::Csv,
        };
        match kind {
            ScenarioKind::Example5 => base,
            ScenarioKind::Example5Nl => Self { true_theta: vec![vec![2.0, 3.0]], theta0: vec![0.0; 2], ..base },
            ScenarioKind::Example4 => Self {
                true_theta: vec![vec![0.4, 0.8]],
                theta0: vec![0.0; 2],
                eta0: vec![1.0; 2],
                gains: GainConfig {
                    alpha: None,
                    f0: 0.14,
                    beta0: None,
                    m_bound: None,
                    gamma: 0.4,
                    beta: Some(1.0),
                    normalization: Normalization::Unit,
                },
                horizon: 500.0,
                step: 1.0,
                input: 1.0,
                y_init: vec![0.0],
                u_init: vec![0.0],
                ..base
            },
            ScenarioKind::Example8 => {
                let (r, w) = ((-0.5f64).exp(), 0.86f64);
                Self {
                    true_theta: vec![vec![0.5, -0.1, 1.0, -0.4], vec![-1.4, 0.3, 1.0, -1.3]],
                    switch_at: vec![50],
                    theta0: vec![0.1, -0.3, 0.5, -0.05],
                    eta0: vec![0.0; 4],
                    gains: GainConfig {
                        alpha: None,
                        f0: 0.4,
                        beta0: None,
                        m_bound: None,
                        gamma: 500.0,
                        beta: Some(1.0),
                        normalization: Normalization::GainWeighted,
                    },
                    horizon: 300.0,
                    step: 1.0,
                    input: 1.0,
                    poles: vec![[(-1.0f64).exp(), 0.0], [r * w.cos(), r * w.sin()], [r * w.cos(), -r * w.sin()]],
                    y_init: vec![-0.2, 0.4],
                    u_init: vec![0.0, 0.0],
                    ..base
                }
            }
        }
    }

    /// Number of estimator steps.
    pub fn steps(&self) -> u64 {
        if self.scenario.is_continuous() {
            (self.horizon / self.step).round() as u64
        } else {
            self.horizon.round() as u64
        }
    }

    pub fn ct_gains(&self) -> Result<CtGains> {
        let g = &self.gains;
        let alpha = g.alpha.ok_or_else(|| Error::Config("gains.alpha is required".into()))?;
        let beta0 = g.beta0.ok_or_else(|| Error::Config("gains.beta0 is required".into()))?;
        match g.m_bound {
            Some(m) => CtGains::new(alpha, g.f0, beta0, m, g.gamma),
            None => CtGains::with_default_bound(alpha, g.f0, beta0, g.gamma),
        }
    }

    pub fn dt_gains(&self) -> Result<DtGains> {
        let g = &self.gains;
        let beta = g.beta.ok_or_else(|| Error::Config("gains.beta is required".into()))?;
        Ok(DtGains::new(g.f0, beta, g.gamma)?.with_normalization(g.normalization))
    }

    pub fn map(&self) -> Result<MonotoneMap> {
        match self.scenario {
            ScenarioKind::Example5Nl => example5::reduced_map(),
            _ => Ok(MonotoneMap::identity(self.eta0.len())),
        }
    }

    pub fn poles_complex(&self) -> Vec<Complex<f64>> {
        self.poles.iter().map(|p| Complex::new(p[0], p[1])).collect()
    }

    fn regime_theta(&self, regime: usize) -> DVector<f64> {
        let i = regime.min(self.true_theta.len() - 1);
        DVector::from_column_slice(&self.true_theta[i])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema != Self::SCHEMA {
            return bad(format!("unsupported schema {} (expected {})", self.schema, Self::SCHEMA));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidGain { name: "horizon", bound: "horizon > 0", value: self.horizon });
        }
        if self.scenario.is_continuous() {
            if !(self.step > 0.0) || !self.step.is_finite() {
                return Err(Error::InvalidGain { name: "step", bound: "step > 0", value: self.step });
            }
            if !(self.filter_lambda > 0.0) {
                return Err(Error::InvalidGain {
                    name: "filter_lambda",
                    bound: "filter_lambda > 0",
                    value: self.filter_lambda,
                });
            }
            self.ct_gains()?;
        } else {
            if self.horizon.fract() != 0.0 {
                return bad(format!("horizon {} must be a whole number of steps", self.horizon));
            }
            self.dt_gains()?;
        }
        DisturbanceSource::new(&self.disturbance)?;

        let map = self.map()?;
        let (p, q) = (map.dim_g(), map.dim_theta());
        let (want_p, want_q) = match self.scenario {
            ScenarioKind::Example5 => (3, 3),
            ScenarioKind::Example5Nl => (3, 2),
            ScenarioKind::Example4 => (2, 2),
            ScenarioKind::Example8 => (4, 4),
        };
        if self.eta0.len() != want_p || p != want_p {
            return Err(Error::dim("eta0", want_p, self.eta0.len()));
        }
        if self.theta0.len() != want_q || q != want_q {
            return Err(Error::dim("theta0", want_q, self.theta0.len()));
        }
        if self.true_theta.is_empty() {
            return bad("true_theta must list at least one parameter vector".into());
        }
        for t in &self.true_theta {
            if t.len() != want_q {
                return Err(Error::dim("true_theta", want_q, t.len()));
            }
        }
        if self.true_theta.len() != self.switch_at.len() + 1 {
            return bad(format!(
                "{} regimes need {} switching instants, got {}",
                self.true_theta.len(),
                self.true_theta.len() - 1,
                self.switch_at.len()
            ));
        }
        SwitchSchedule::new(self.switch_at.clone())?;
        if self.switch_at.first() == Some(&0) {
            return bad("switch_at instants must be positive".into());
        }
        if !self.switch_at.is_empty() && self.scenario != ScenarioKind::Example8 {
            return bad(format!("scenario {} does not support switching", self.scenario.name()));
        }
        let all_finite = self
            .true_theta
            .iter()
            .flatten()
            .chain(&self.theta0)
            .chain(&self.eta0)
            .chain(&self.y_init)
            .chain(&self.u_init)
            .all(|x| x.is_finite());
        if !all_finite || !self.input.is_finite() {
            return Err(Error::NonFinite("configuration"));
        }

        for e in &self.estimators {
            match e {
                EstimatorKind::LsdExt if !self.scenario.is_continuous() => {
                    return bad("lsd_ext is only available for continuous-time scenarios".into())
                }
                EstimatorKind::Gradient | EstimatorKind::Rls if self.scenario == ScenarioKind::Example5Nl => {
                    return bad("baseline estimators need a linear parameterization".into())
                }
                _ => {}
            }
        }
        if self.estimators.iter().any(|e| matches!(e, EstimatorKind::Gradient)) && !(self.baseline.gradient_gain > 0.0)
        {
            return Err(Error::InvalidGain {
                name: "baseline.gradient_gain",
                bound: "gradient_gain > 0",
                value: self.baseline.gradient_gain,
            });
        }
        if self.estimators.iter().any(|e| matches!(e, EstimatorKind::Rls)) {
            let b = &self.baseline;
            if !(b.rls_forgetting > 0.0 && b.rls_forgetting <= 1.0) {
                return Err(Error::InvalidGain {
                    name: "baseline.rls_forgetting",
                    bound: "rls_forgetting ∈ (0,1]",
                    value: b.rls_forgetting,
                });
            }
            if !(b.rls_p0 > 0.0) {
                return Err(Error::InvalidGain { name: "baseline.rls_p0", bound: "rls_p0 > 0", value: b.rls_p0 });
            }
        }

        match self.scenario {
            ScenarioKind::Example4 => {
                if self.y_init.len() != 1 || self.u_init.len() != 1 {
                    return bad("example4 needs y_init and u_init of length 1".into());
                }
            }
            ScenarioKind::Example8 => {
                if self.y_init.len() != 2 || self.u_init.len() != 2 {
                    return bad("example8 needs y_init and u_init of length 2".into());
                }
                if self.theta0.iter().all(|&x| x == 0.0) {
                    return bad("example8 needs a nonzero theta0 so the loop is excited".into());
                }
                desired_polynomial(&self.poles_complex())?;
                if self.estimators.contains(&EstimatorKind::Lsd) {
                    let g = self.dt_gains()?;
                    if g.beta() != 1.0 {
                        return Err(Error::InvalidGain {
                            name: "beta",
                            bound: "beta = 1 for the resetting estimator",
                            value: g.beta(),
                        });
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// One row of an estimator trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Time in seconds, or the step index for discrete scenarios.
    pub t: f64,
    pub theta_hat: Vec<f64>,
    pub theta_err: Vec<f64>,
    pub err_norm: f64,
    pub delta: f64,
    pub z: f64,
    pub f_norm: f64,
    pub v: f64,
    pub y: Option<f64>,
    pub u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorTrace {
    pub estimator: EstimatorKind,
    pub records: Vec<TraceRecord>,
    /// Set when the run stopped early; `records` then ends at the last valid step.
    pub failure: Option<String>,
}

struct Diag {
    delta: f64,
    z: f64,
    f_norm: f64,
    /// Divisor of `|theta_err|^2` in the Lyapunov column.
    v_scale: f64,
}

fn record(t: f64, theta_hat: &DVector<f64>, theta: &DVector<f64>, d: Diag, yu: Option<(f64, f64)>) -> TraceRecord {
    let err = theta_hat - theta;
    let n = err.norm();
    TraceRecord {
        t,
        theta_hat: theta_hat.iter().copied().collect(),
        theta_err: err.iter().copied().collect(),
        err_norm: n,
        delta: d.delta,
        z: d.z,
        f_norm: d.f_norm,
        v: n * n / d.v_scale,
        y: yu.map(|p| p.0),
        u: yu.map(|p| p.1),
    }
}

/// Disturbance wrapper for continuous-time samplers; draws are indexed by
/// the integration step containing `t`.
struct Perturbed<S> {
    inner: S,
    source: DisturbanceSource,
    g_theta: DVector<f64>,
    h: f64,
}

impl<S: Sampler> Sampler for Perturbed<S> {
    fn sample(&mut self, t: f64) -> RegressionSample {
        let s = self.inner.sample(t);
        if self.source.is_zero() {
            return s;
        }
        let index = (t / self.h + 1e-7).floor().max(0.0) as u64;
        self.source.inject(&s, &self.g_theta, index)
    }
}

fn ct_sampler(cfg: &ScenarioConfig) -> Result<(Perturbed<Example5Sampler>, DVector<f64>)> {
    let map = cfg.map()?;
    let theta = cfg.regime_theta(0);
    let g = map.evaluate(&theta)?;
    let inner = Example5Sampler::new([g[0], g[1], g[2]], cfg.filter_lambda, cfg.input);
    Ok((Perturbed { inner, source: DisturbanceSource::new(&cfg.disturbance)?, g_theta: g, h: cfg.step }, theta))
}

fn run_ct(cfg: &ScenarioConfig, est: EstimatorKind) -> Result<EstimatorTrace> {
    let gains = cfg.ct_gains()?;
    let map = cfg.map()?;
    let (mut sampler, theta) = ct_sampler(cfg)?;
    let h = cfg.step;
    let n = cfg.steps();
    let eta0 = DVector::from_column_slice(&cfg.eta0);
    let theta0 = DVector::from_column_slice(&cfg.theta0);
    let v_lsd = 2.0 * gains.gamma();
    let mut records = Vec::with_capacity(n as usize + 1);
    let mut failure = None;

    match est {
        EstimatorKind::Lsd => {
            let mut s = CtEstimatorState::new(eta0, theta0, &gains);
            let diag = |s: &CtEstimatorState| -> Result<Diag> {
                Ok(Diag {
                    delta: ct::ct_scalar_outputs(s, &gains)?.delta,
                    z: s.z,
                    f_norm: sym_norm(&s.f),
                    v_scale: v_lsd,
                })
            };
            records.push(record(0.0, &s.theta_hat, &theta, diag(&s)?, None));
            for k in 0..n {
                match ct::ct_step(&s, &mut sampler, &gains, &map, h) {
                    Ok(mut next) => {
                        next.t = (k + 1) as f64 * h;
                        s = next;
                        records.push(record(s.t, &s.theta_hat, &theta, diag(&s)?, None));
                    }
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
        }
        EstimatorKind::LsdExt => {
            let mut s = ExtState::new(eta0.len(), theta0, &gains);
            let diag = |s: &ExtState| -> Result<Diag> {
                Ok(Diag { delta: mix(&s.y, &s.phi)?.delta, z: s.z, f_norm: sym_norm(&s.f), v_scale: v_lsd })
            };
            records.push(record(0.0, &s.theta_hat, &theta, diag(&s)?, None));
            for k in 0..n {
                match ct::ext_step(&s, &mut sampler, &gains, &map, h) {
                    Ok(mut next) => {
                        next.t = (k + 1) as f64 * h;
                        s = next;
                        records.push(record(s.t, &s.theta_hat, &theta, diag(&s)?, None));
                    }
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
        }
        EstimatorKind::Gradient | EstimatorKind::Rls => {
            let mut b = Baseline::new(cfg, est, theta0)?;
            records.push(record(0.0, b.theta(), &theta, b.diag(), None));
            for k in 0..n {
                let sample = sampler.sample(k as f64 * h);
                if let Err(e) = b.step(&sample) {
                    failure = Some(e.to_string());
                    break;
                }
                records.push(record((k + 1) as f64 * h, b.theta(), &theta, b.diag(), None));
            }
        }
    }
    Ok(EstimatorTrace { estimator: est, records, failure })
}

enum Baseline {
    Gradient(GradientState),
    Rls(RlsState),
}

impl Baseline {
    fn new(cfg: &ScenarioConfig, est: EstimatorKind, theta0: DVector<f64>) -> Result<Self> {
        let q = theta0.len();
        Ok(match est {
            EstimatorKind::Gradient => {
                Baseline::Gradient(GradientState::new(theta0, DMatrix::identity(q, q) * cfg.baseline.gradient_gain)?)
            }
            _ => Baseline::Rls(RlsState::new(
                theta0,
                DMatrix::identity(q, q) * cfg.baseline.rls_p0,
                cfg.baseline.rls_forgetting,
            )?),
        })
    }

    fn theta(&self) -> &DVector<f64> {
        match self {
            Baseline::Gradient(s) => &s.theta_hat,
            Baseline::Rls(s) => &s.theta_hat,
        }
    }

    fn step(&mut self, sample: &RegressionSample) -> Result<()> {
        match self {
            Baseline::Gradient(s) => *s = gradient_step_dt(s, sample)?,
            Baseline::Rls(s) => *s = rls_step_dt(s, sample)?,
        }
        Ok(())
    }

    fn diag(&self) -> Diag {
        match self {
            Baseline::Gradient(s) => Diag { delta: 0.0, z: 1.0, f_norm: sym_norm(&s.gain), v_scale: 2.0 },
            Baseline::Rls(s) => Diag { delta: 0.0, z: 1.0, f_norm: sym_norm(&s.p), v_scale: 2.0 },
        }
    }
}

/// Discrete-time estimator behind a common interface.
enum DtRunner {
    Plain(DtEstimatorState, DtGains, MonotoneMap),
    Switched(SwitchedDtState, DtGains, SwitchSchedule, MonotoneMap),
    Base(Baseline),
}

impl DtRunner {
    fn new(cfg: &ScenarioConfig, est: EstimatorKind) -> Result<Self> {
        let eta0 = DVector::from_column_slice(&cfg.eta0);
        let theta0 = DVector::from_column_slice(&cfg.theta0);
        Ok(match est {
            EstimatorKind::Lsd if cfg.scenario == ScenarioKind::Example8 => {
                let g = cfg.dt_gains()?;
                let mut instants = vec![0];
                instants.extend(&cfg.switch_at);
                DtRunner::Switched(
                    SwitchedDtState::new(eta0, theta0, &g),
                    g,
                    SwitchSchedule::new(instants)?,
                    cfg.map()?,
                )
            }
            EstimatorKind::Lsd => {
                let g = cfg.dt_gains()?;
                DtRunner::Plain(DtEstimatorState::new(eta0, theta0, &g), g, cfg.map()?)
            }
            EstimatorKind::LsdExt => {
                return Err(Error::Config("lsd_ext is only available for continuous-time scenarios".into()))
            }
            _ => DtRunner::Base(Baseline::new(cfg, est, theta0)?),
        })
    }

    fn theta(&self) -> &DVector<f64> {
        match self {
            DtRunner::Plain(s, ..) => &s.theta_hat,
            DtRunner::Switched(s, ..) => &s.theta_hat,
            DtRunner::Base(b) => b.theta(),
        }
    }

    fn diag(&self) -> Result<Diag> {
        Ok(match self {
            DtRunner::Plain(s, g, _) => {
                Diag { delta: dt::dt_outputs(s, g)?.delta, z: s.z, f_norm: sym_norm(&s.f), v_scale: 2.0 * g.gamma() }
            }
            DtRunner::Switched(s, g, ..) => Diag {
                delta: dt::switched_outputs(s, g)?.delta,
                z: s.z,
                f_norm: sym_norm(&s.f),
                v_scale: 2.0 * g.gamma(),
            },
            DtRunner::Base(b) => b.diag(),
        })
    }

    fn step(&mut self, sample: &RegressionSample) -> Result<()> {
        match self {
            DtRunner::Plain(s, g, m) => *s = dt::dt_step(s, sample, g, m)?,
            DtRunner::Switched(s, g, sched, m) => *s = dt::switched_step(s, sample, g, sched, m)?,
            DtRunner::Base(b) => b.step(sample)?,
        }
        Ok(())
    }
}

fn run_example4(cfg: &ScenarioConfig, est: EstimatorKind) -> Result<EstimatorTrace> {
    let theta = cfg.regime_theta(0);
    let mut plant = Example4Plant::new([theta[0], theta[1]], cfg.input, cfg.y_init[0], cfg.u_init[0]);
    let mut source = DisturbanceSource::new(&cfg.disturbance)?;
    let mut runner = DtRunner::new(cfg, est)?;
    let n = cfg.steps();
    let mut records = Vec::with_capacity(n as usize + 1);
    records.push(record(0.0, runner.theta(), &theta, runner.diag()?, None));
    let mut failure = None;
    for k in 0..n {
        let sample = source.inject(&plant.next_sample(), &theta, k);
        if let Err(e) = runner.step(&sample) {
            failure = Some(e.to_string());
            break;
        }
        records.push(record((k + 1) as f64, runner.theta(), &theta, runner.diag()?, None));
    }
    Ok(EstimatorTrace { estimator: est, records, failure })
}

/// Closed loop: at step `k` the controller designed from the current
/// estimate `theta_hat_k` produces `u_k`, then the estimator consumes
/// `(phi_k, y_k)`. Record `k` holds `theta_hat_k`, `y_k` and `u_k`.
fn run_example8(
    cfg: &ScenarioConfig,
    est: EstimatorKind,
    phis: Option<&mut Vec<DVector<f64>>>,
) -> Result<EstimatorTrace> {
    let regimes: Vec<DVector<f64>> = (0..cfg.true_theta.len()).map(|i| cfg.regime_theta(i)).collect();
    let schedule = SwitchSchedule::new(cfg.switch_at.clone())?;
    let mut plant =
        Example8Plant::new(regimes, schedule.clone(), [cfg.y_init[0], cfg.y_init[1]], [cfg.u_init[0], cfg.u_init[1]]);
    let poles = cfg.poles_complex();
    let mut source = DisturbanceSource::new(&cfg.disturbance)?;
    let mut runner = DtRunner::new(cfg, est)?;
    let n = cfg.steps();
    let mut records = Vec::with_capacity(n as usize + 1);
    let mut failure = None;
    let mut phis = phis;
    for k in 0..=n {
        let sample = plant.output();
        let theta = plant.active_theta().clone();
        let ctrl = pole_placement(runner.theta(), &poles)?;
        let u = ctrl.control(sample.y, -sample.phi[0], sample.phi[2], cfg.input);
        if !sample.y.is_finite() || !u.is_finite() {
            failure = Some(format!("closed loop diverged at step {k}"));
            break;
        }
        records.push(record(k as f64, runner.theta(), &theta, runner.diag()?, Some((sample.y, u))));
        if k == n {
            break;
        }
        if let Some(p) = phis.as_deref_mut() {
            p.push(sample.phi.clone());
        }
        let measured = source.inject(&sample, &theta, k);
        if let Err(e) = runner.step(&measured) {
            failure = Some(e.to_string());
            break;
        }
        plant.apply(sample.y, u);
    }
    Ok(EstimatorTrace { estimator: est, records, failure })
}

fn run_one(cfg: &ScenarioConfig, est: EstimatorKind) -> Result<EstimatorTrace> {
    match cfg.scenario {
        ScenarioKind::Example5 | ScenarioKind::Example5Nl => run_ct(cfg, est),
        ScenarioKind::Example4 => run_example4(cfg, est),
        ScenarioKind::Example8 => run_example8(cfg, est, None),
    }
}

/// Runs every selected estimator on the scenario. Estimators run in
/// parallel; each run is sequential and deterministic.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<EstimatorTrace>> {
    cfg.validate()?;
    cfg.estimators.par_iter().map(|&e| run_one(cfg, e)).collect()
}

/// Regressor sequence of the scenario: `phi(k h)` for `k = 0..=N` in
/// continuous time (with the step returned), `phi_k` for `k < K` in discrete
/// time (step 1). Closed-loop scenarios use the `lsd` estimator in the loop.
pub fn regressor_trajectory(cfg: &ScenarioConfig) -> Result<(Vec<DVector<f64>>, f64)> {
    cfg.validate()?;
    let n = cfg.steps();
    match cfg.scenario {
        ScenarioKind::Example5 | ScenarioKind::Example5Nl => {
            let (mut s, _) = ct_sampler(cfg)?;
            Ok(((0..=n).map(|k| s.inner.sample(k as f64 * cfg.step).phi).collect(), cfg.step))
        }
        ScenarioKind::Example4 => {
            let th = cfg.regime_theta(0);
            let mut plant = Example4Plant::new([th[0], th[1]], cfg.input, cfg.y_init[0], cfg.u_init[0]);
            Ok(((0..n).map(|_| plant.next_sample().phi).collect(), 1.0))
        }
        ScenarioKind::Example8 => {
            let mut phis = Vec::with_capacity(n as usize);
            let trace = run_example8(cfg, EstimatorKind::Lsd, Some(&mut phis))?;
            if let Some(f) = trace.failure {
                return Err(Error::Config(format!("closed loop failed: {f}")));
            }
            Ok((phis, 1.0))
        }
    }
}
