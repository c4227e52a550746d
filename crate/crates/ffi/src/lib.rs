//! C ABI over the `relaxls` estimators.
//!
//! Every fallible function returns a [`RelaxlsStatus`]. On failure the
//! message is kept per thread and can be read with
//! [`relaxls_last_error_message`]. Matrices are dense, row-major. The
//! estimator handles work on linear regressions `y = phi^T theta` (identity
//! parameter map).

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::{DMatrix, DVector};
use relaxls::ct::{ct_linear_step, ct_scalar_outputs, CtEstimatorState, CtGains};
use relaxls::dt::{
    dt_linear_step, dt_outputs, switched_outputs, switched_step, DtEstimatorState, DtGains, Normalization,
    SwitchSchedule, SwitchedDtState,
};
use relaxls::{Error, MonotoneMap, RegressionSample};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxlsStatus {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    InvalidArgument = 3,
    NonFinite = 4,
    /// Numerical failure while running: lost definiteness, blow-up, bad normalization.
    Numerical = 5,
    Io = 6,
    Config = 7,
    Panic = 99,
}

/// Update weighting of the discrete estimators.
pub const RELAXLS_NORMALIZATION_UNIT: c_int = 0;
pub const RELAXLS_NORMALIZATION_GAIN_WEIGHTED: c_int = 1;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RelaxlsStatus {
    match e {
        Error::Dimension { .. } => RelaxlsStatus::Dimension,
        Error::NonFinite(_) => RelaxlsStatus::NonFinite,
        Error::InvalidGain { .. } | Error::Schedule(_) | Error::Conjugation(_) => RelaxlsStatus::InvalidArgument,
        Error::IntegrationBlowup { .. } | Error::LostDefiniteness { .. } | Error::Normalization(_) => {
            RelaxlsStatus::Numerical
        }
        Error::Io(_) => RelaxlsStatus::Io,
        _ => RelaxlsStatus::Config,
    }
}

struct Failure(RelaxlsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RelaxlsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RelaxlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RelaxlsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            RelaxlsStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn write(dst: *mut f64, src: &[f64], what: &str) -> Result<(), Failure> {
    if src.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return Err(null(what));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

fn normalization(n: c_int) -> Result<Normalization, Failure> {
    match n {
        RELAXLS_NORMALIZATION_UNIT => Ok(Normalization::Unit),
        RELAXLS_NORMALIZATION_GAIN_WEIGHTED => Ok(Normalization::GainWeighted),
        other => Err(Failure(RelaxlsStatus::InvalidArgument, format!("unknown normalization {other}"))),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn relaxls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one, or 0 if
/// there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn relaxls_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

#[no_mangle]
pub extern "C" fn relaxls_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Adjugate and determinant of the `n x n` matrix `a`.
///
/// # Safety
/// `a` and `adj_out` must hold `n * n` doubles, `det_out` one.
#[no_mangle]
pub unsafe extern "C" fn relaxls_adjugate(
    a: *const f64,
    n: usize,
    adj_out: *mut f64,
    det_out: *mut f64,
) -> RelaxlsStatus {
    guard(|| {
        let m = DMatrix::from_row_slice(n, n, slice(a, n * n, "a")?);
        let (adj, det) = relaxls::regression::adjugate(&m)?;
        write(adj_out, adj.transpose().as_slice(), "adj_out")?;
        *out(det_out, "det_out")? = det;
        Ok(())
    })
}

/// Mixing step: `delta = det(phi)`, `cal_y = adj(phi) y`.
///
/// # Safety
/// `y` and `cal_y_out` must hold `p` doubles, `phi` `p * p`, `delta_out` one.
#[no_mangle]
pub unsafe extern "C" fn relaxls_mix(
    y: *const f64,
    phi: *const f64,
    p: usize,
    cal_y_out: *mut f64,
    delta_out: *mut f64,
) -> RelaxlsStatus {
    guard(|| {
        let y = DVector::from_column_slice(slice(y, p, "y")?);
        let phi = DMatrix::from_row_slice(p, p, slice(phi, p * p, "phi")?);
        let r = relaxls::regression::mix(&y, &phi)?;
        write(cal_y_out, r.cal_y.as_slice(), "cal_y_out")?;
        *out(delta_out, "delta_out")? = r.delta;
        Ok(())
    })
}

/// Discrete-time estimator with forgetting factor `beta`.
pub struct RelaxlsDtEstimator {
    state: DtEstimatorState,
    gains: DtGains,
}

/// # Safety
/// `eta0` and `theta0` must hold `p` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relaxls_dt_new(
    p: usize,
    eta0: *const f64,
    theta0: *const f64,
    f0: f64,
    beta: f64,
    gamma: f64,
    normalization_kind: c_int,
    out_handle: *mut *mut RelaxlsDtEstimator,
) -> RelaxlsStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let gains = DtGains::new(f0, beta, gamma)?.with_normalization(normalization(normalization_kind)?);
        let state = DtEstimatorState::new(
            DVector::from_column_slice(slice(eta0, p, "eta0")?),
            DVector::from_column_slice(slice(theta0, p, "theta0")?),
            &gains,
        );
        *slot = Box::into_raw(Box::new(RelaxlsDtEstimator { state, gains }));
        Ok(())
    })
}

/// Processes one sample. On failure the estimator keeps its previous state.
///
/// # Safety
/// `handle` must come from [`relaxls_dt_new`]; `phi` must hold `p` doubles.
#[no_mangle]
pub unsafe extern "C" fn relaxls_dt_step(handle: *mut RelaxlsDtEstimator, phi: *const f64, y: f64) -> RelaxlsStatus {
    guard(|| {
        let est = out(handle, "handle")?;
        let p = est.state.dim_p();
        let sample = RegressionSample::new(est.state.k as f64, DVector::from_column_slice(slice(phi, p, "phi")?), y);
        est.state = dt_linear_step(&est.state, &sample, &est.gains)?;
        Ok(())
    })
}

/// # Safety
/// `handle` must be valid; `theta_out` must hold `p` doubles.
#[no_mangle]
pub unsafe extern "C" fn relaxls_dt_theta(handle: *const RelaxlsDtEstimator, theta_out: *mut f64) -> RelaxlsStatus {
    guard(|| {
        let est = handle.as_ref().ok_or_else(|| null("handle"))?;
        write(theta_out, est.state.theta_hat.as_slice(), "theta_out")
    })
}

/// Current scalar regressor `delta`.
///
/// # Safety
/// `handle` must be valid; `delta_out` writable.
#[no_mangle]
pub unsafe extern "C" fn relaxls_dt_delta(handle: *const RelaxlsDtEstimator, delta_out: *mut f64) -> RelaxlsStatus {
    guard(|| {
        let est = handle.as_ref().ok_or_else(|| null("handle"))?;
        *out(delta_out, "delta_out")? = dt_outputs(&est.state, &est.gains)?.delta;
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`relaxls_dt_new`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn relaxls_dt_free(handle: *mut RelaxlsDtEstimator) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Resetting estimator for plants whose parameters switch at known steps.
pub struct RelaxlsSwitchedEstimator {
    state: SwitchedDtState,
    gains: DtGains,
    schedule: SwitchSchedule,
    map: MonotoneMap,
}

/// `instants` lists the reset steps in increasing order; `beta` is fixed to 1.
///
/// # Safety
/// `eta0`, `theta0` must hold `p` doubles, `instants` `n_instants` values.
#[no_mangle]
pub unsafe extern "C" fn relaxls_switched_new(
    p: usize,
    eta0: *const f64,
    theta0: *const f64,
    f0: f64,
    gamma: f64,
    normalization_kind: c_int,
    instants: *const u64,
    n_instants: usize,
    out_handle: *mut *mut RelaxlsSwitchedEstimator,
) -> RelaxlsStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let gains = DtGains::new(f0, 1.0, gamma)?.with_normalization(normalization(normalization_kind)?);
        let instants = if n_instants == 0 {
            vec![]
        } else if instants.is_null() {
            return Err(null("instants"));
        } else {
            std::slice::from_raw_parts(instants, n_instants).to_vec()
        };
        let schedule = SwitchSchedule::new(instants)?;
        let state = SwitchedDtState::new(
            DVector::from_column_slice(slice(eta0, p, "eta0")?),
            DVector::from_column_slice(slice(theta0, p, "theta0")?),
            &gains,
        );
        let map = MonotoneMap::identity(p);
        *slot = Box::into_raw(Box::new(RelaxlsSwitchedEstimator { state, gains, schedule, map }));
        Ok(())
    })
}

/// # Safety
/// `handle` must be valid; `phi` must hold `p` doubles.
#[no_mangle]
pub unsafe extern "C" fn relaxls_switched_step(
    handle: *mut RelaxlsSwitchedEstimator,
    phi: *const f64,
    y: f64,
) -> RelaxlsStatus {
    guard(|| {
        let est = out(handle, "handle")?;
        let p = est.state.eta_hat.len();
        let sample = RegressionSample::new(est.state.k as f64, DVector::from_column_slice(slice(phi, p, "phi")?), y);
        est.state = switched_step(&est.state, &sample, &est.gains, &est.schedule, &est.map)?;
        Ok(())
    })
}

/// # Safety
/// `handle` must be valid; `theta_out` must hold `p` doubles.
#[no_mangle]
pub unsafe extern "C" fn relaxls_switched_theta(
    handle: *const RelaxlsSwitchedEstimator,
    theta_out: *mut f64,
) -> RelaxlsStatus {
    guard(|| {
        let est = handle.as_ref().ok_or_else(|| null("handle"))?;
        write(theta_out, est.state.theta_hat.as_slice(), "theta_out")
    })
}

/// # Safety
/// `handle` must be valid; `delta_out` writable.
#[no_mangle]
pub unsafe extern "C" fn relaxls_switched_delta(
    handle: *const RelaxlsSwitchedEstimator,
    delta_out: *mut f64,
) -> RelaxlsStatus {
    guard(|| {
        let est = handle.as_ref().ok_or_else(|| null("handle"))?;
        *out(delta_out, "delta_out")? = switched_outputs(&est.state, &est.gains)?.delta;
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`relaxls_switched_new`].
#[no_mangle]
pub unsafe extern "C" fn relaxls_switched_free(handle: *mut RelaxlsSwitchedEstimator) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Fills `phi_out` (length `p`) and `y_out` for time `t`. Returns 0 on
/// success; any other value aborts the step.
pub type RelaxlsSampler =
    Option<unsafe extern "C" fn(t: f64, phi_out: *mut f64, y_out: *mut f64, user_data: *mut c_void) -> c_int>;

/// Continuous-time estimator, integrated with fixed-step RK4.
pub struct RelaxlsCtEstimator {
    state: CtEstimatorState,
    gains: CtGains,
}

/// `m_bound <= 0` selects the default bound `100 / f0`.
///
/// # Safety
/// `eta0` and `theta0` must hold `p` doubles; `out_handle` writable.
#[no_mangle]
pub unsafe extern "C" fn relaxls_ct_new(
    p: usize,
    eta0: *const f64,
    theta0: *const f64,
    alpha: f64,
    f0: f64,
    beta0: f64,
    m_bound: f64,
    gamma: f64,
    out_handle: *mut *mut RelaxlsCtEstimator,
) -> RelaxlsStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let gains = if m_bound > 0.0 {
            CtGains::new(alpha, f0, beta0, m_bound, gamma)?
        } else {
            CtGains::with_default_bound(alpha, f0, beta0, gamma)?
        };
        let state = CtEstimatorState::new(
            DVector::from_column_slice(slice(eta0, p, "eta0")?),
            DVector::from_column_slice(slice(theta0, p, "theta0")?),
            &gains,
        );
        *slot = Box::into_raw(Box::new(RelaxlsCtEstimator { state, gains }));
        Ok(())
    })
}

/// Advances the estimator by `h`, calling `sampler` at `t`, `t + h/2` and
/// `t + h`. On failure the estimator keeps its previous state.
///
/// # Safety
/// `handle` must be valid and `sampler` must honour its contract.
#[no_mangle]
pub unsafe extern "C" fn relaxls_ct_step(
    handle: *mut RelaxlsCtEstimator,
    h: f64,
    sampler: RelaxlsSampler,
    user_data: *mut c_void,
) -> RelaxlsStatus {
    guard(|| {
        let est = out(handle, "handle")?;
        let cb = sampler.ok_or_else(|| null("sampler"))?;
        let p = est.state.dim_p();
        let mut callback_error: Option<(f64, c_int)> = None;
        let mut sample = |t: f64| {
            let mut phi = vec![0.0; p];
            let mut y = 0.0;
            let rc = cb(t, phi.as_mut_ptr(), &mut y, user_data);
            if rc != 0 && callback_error.is_none() {
                callback_error = Some((t, rc));
            }
            RegressionSample::new(t, DVector::from_vec(phi), y)
        };
        let next = ct_linear_step(&est.state, &mut sample, &est.gains, h);
        if let Some((t, rc)) = callback_error {
            return Err(Failure(RelaxlsStatus::InvalidArgument, format!("sampler returned {rc} at t = {t}")));
        }
        let mut next = next?;
        next.t = est.state.t + h;
        est.state = next;
        Ok(())
    })
}

/// # Safety
/// `handle` must be valid; `theta_out` must hold `p` doubles.
#[no_mangle]
pub unsafe extern "C" fn relaxls_ct_theta(handle: *const RelaxlsCtEstimator, theta_out: *mut f64) -> RelaxlsStatus {
    guard(|| {
        let est = handle.as_ref().ok_or_else(|| null("handle"))?;
        write(theta_out, est.state.theta_hat.as_slice(), "theta_out")
    })
}

/// # Safety
/// `handle` must be valid; `delta_out` writable.
#[no_mangle]
pub unsafe extern "C" fn relaxls_ct_delta(handle: *const RelaxlsCtEstimator, delta_out: *mut f64) -> RelaxlsStatus {
    guard(|| {
        let est = handle.as_ref().ok_or_else(|| null("handle"))?;
        *out(delta_out, "delta_out")? = ct_scalar_outputs(&est.state, &est.gains)?.delta;
        Ok(())
    })
}

/// # Safety
/// `handle` must be valid; `t_out` writable.
#[no_mangle]
pub unsafe extern "C" fn relaxls_ct_time(handle: *const RelaxlsCtEstimator, t_out: *mut f64) -> RelaxlsStatus {
    guard(|| {
        let est = handle.as_ref().ok_or_else(|| null("handle"))?;
        *out(t_out, "t_out")? = est.state.t;
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`relaxls_ct_new`].
#[no_mangle]
pub unsafe extern "C" fn relaxls_ct_free(handle: *mut RelaxlsCtEstimator) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Runs a scenario described by a JSON configuration and stores a JSON
/// document `[{"estimator", "failure", "records"}]` in `*json_out`, to be
/// released with [`relaxls_string_free`].
///
/// # Safety
/// `config` must be a NUL-terminated string; `json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn relaxls_run_scenario_json(config: *const c_char, json_out: *mut *mut c_char) -> RelaxlsStatus {
    guard(|| {
        let slot = out(json_out, "json_out")?;
        if config.is_null() {
            return Err(null("config"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| Failure(RelaxlsStatus::Config, format!("configuration is not UTF-8: {e}")))?;
        let cfg = relaxls::io::parse_config(text)?;
        let traces = relaxls::scenarios::run_scenario(&cfg)?;
        let mut doc = Vec::with_capacity(traces.len());
        for t in &traces {
            doc.push(serde_json::json!({
                "estimator": t.estimator.name(),
                "failure": t.failure,
                "records": relaxls::io::trace_to_json(&t.records)?,
            }));
        }
        let s = serde_json::to_string(&doc).map_err(Error::from)?;
        *slot = CString::new(s).map_err(|e| Failure(RelaxlsStatus::Config, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn relaxls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
