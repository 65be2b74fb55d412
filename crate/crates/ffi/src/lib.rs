//! C interface to `radtail`.
//!
//! Every entry point returns a [`RadtailStatus`]. On failure a message is
//! available from [`radtail_last_error`] on the same thread until the next
//! failing call. Objects are opaque and owned by the caller, who releases
//! them with the matching `_free` function. Panics never cross the boundary;
//! they surface as `RADTAIL_STATUS_PANIC`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use radtail::analysis::{compare, predict, TailPrediction, Verdict};
use radtail::config::{IterateKind, RunConfig};
use radtail::evolve::{run, RunOutput};
use radtail::freewave::FreeWave;
use radtail::numerics::{DoubleDouble, Precision, Real};
use radtail::perturb::{iterate_linear, iterate_nonlinear};
use radtail::profiles::Profile;
use radtail::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadtailStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Blowup = 4,
    Quadrature = 5,
    Unsupported = 6,
    InsufficientData = 7,
    Io = 8,
    Panic = 9,
}

/// Outcome of a tail verification.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadtailVerdict {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
}

/// Closed-form tail `coefficient / t^gamma`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadtailPrediction {
    pub gamma: f64,
    /// NaN when the coefficient is not known in closed form.
    pub coefficient: f64,
    pub order_in_small_param: u32,
    pub anomalous: bool,
}

/// Fit of an evolved series against its prediction.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadtailVerification {
    pub verdict: RadtailVerdict,
    pub prediction: RadtailPrediction,
    /// NaN when no plateau formed.
    pub fitted_gamma: f64,
    /// NaN when not fitted.
    pub fitted_amplitude: f64,
    /// Suggested `t_final` when inconclusive, otherwise NaN.
    pub recommended_t_final: f64,
}

/// A parsed run configuration.
pub struct RadtailConfig(RunConfig);

/// Sampled series of one evolution.
pub struct RadtailRun(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RadtailStatus {
    match e {
        Error::InvalidArgument(_) | Error::DerivativeOrder { .. } => RadtailStatus::InvalidArgument,
        Error::Config(_) => RadtailStatus::Config,
        Error::Blowup { .. } => RadtailStatus::Blowup,
        Error::QuadratureNonConvergence { .. } => RadtailStatus::Quadrature,
        Error::UnsupportedModel(_) => RadtailStatus::Unsupported,
        Error::SignChange { .. } | Error::InsufficientData(_) => RadtailStatus::InsufficientData,
        Error::Io(_) => RadtailStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Error>) -> RadtailStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RadtailStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RadtailStatus::Panic
        }
    }
}

fn null_status(what: &str) -> RadtailStatus {
    set_error(format!("{what} is null"));
    RadtailStatus::NullPointer
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn radtail_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn radtail_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a TOML run configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn radtail_config_parse(toml: *const c_char, out: *mut *mut RadtailConfig) -> RadtailStatus {
    if toml.is_null() {
        return null_status("toml");
    }
    if out.is_null() {
        return null_status("out");
    }
    guard(|| {
        let text = CStr::from_ptr(toml).to_str().map_err(|_| Error::Config("configuration is not UTF-8".into()))?;
        let cfg = RunConfig::parse(text)?;
        *out = Box::into_raw(Box::new(RadtailConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a pointer from [`radtail_config_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn radtail_config_free(cfg: *mut RadtailConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Writes the fully resolved configuration as TOML into `buf` (NUL
/// terminated). `*len` receives the required size including the NUL; when
/// `cap` is too small nothing is written and `RADTAIL_STATUS_INVALID_ARGUMENT`
/// is returned.
///
/// # Safety
/// `cfg` must be valid, `len` non-null, and `buf` writable for `cap` bytes
/// (it may be null when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn radtail_config_resolved(
    cfg: *const RadtailConfig,
    buf: *mut c_char,
    cap: usize,
    len: *mut usize,
) -> RadtailStatus {
    if cfg.is_null() || len.is_null() {
        return null_status("cfg or len");
    }
    guard(|| {
        let text = (*cfg).0.to_toml();
        *len = text.len() + 1;
        if cap < text.len() + 1 || buf.is_null() {
            return Err(Error::InvalidArgument(format!("buffer holds {cap} bytes, {} needed", text.len() + 1)));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

fn to_c_prediction(p: &TailPrediction) -> RadtailPrediction {
    RadtailPrediction {
        gamma: p.gamma,
        coefficient: p.coefficient.unwrap_or(f64::NAN),
        order_in_small_param: p.order_in_small_param,
        anomalous: p.anomalous,
    }
}

fn with_wave<R>(
    cfg: &RunConfig,
    f64_path: impl FnOnce(&FreeWave<f64>) -> Result<R, Error>,
    dd_path: impl FnOnce(&FreeWave<DoubleDouble>) -> Result<R, Error>,
) -> Result<R, Error> {
    let model = cfg.model.resolve()?;
    match cfg.evolve.precision {
        Precision::Standard => f64_path(&FreeWave::new(cfg.profile.build()?, model.l)?),
        Precision::Extended => dd_path(&FreeWave::new(cfg.profile.build()?, model.l)?),
    }
}

/// Closed-form leading tail of the configured model.
///
/// # Safety
/// `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn radtail_predict(cfg: *const RadtailConfig, out: *mut RadtailPrediction) -> RadtailStatus {
    if cfg.is_null() || out.is_null() {
        return null_status("cfg or out");
    }
    guard(|| {
        let c = &(*cfg).0;
        let model = c.model.resolve()?;
        let p = predict(&model, &c.profile.build::<DoubleDouble>()?)?;
        *out = to_c_prediction(&p);
        Ok(())
    })
}

/// Evolves the configured model.
///
/// # Safety
/// `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn radtail_evolve(cfg: *const RadtailConfig, out: *mut *mut RadtailRun) -> RadtailStatus {
    if cfg.is_null() || out.is_null() {
        return null_status("cfg or out");
    }
    guard(|| {
        let c = &(*cfg).0;
        let model = c.model.resolve()?;
        let res = with_wave(c, |w| run(&model, w, &c.evolve), |w| run(&model, w, &c.evolve))?;
        *out = Box::into_raw(Box::new(RadtailRun(res)));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a pointer from [`radtail_evolve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn radtail_run_free(run: *mut RadtailRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of series (one per observation radius).
///
/// # Safety
/// `run` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn radtail_run_series_count(run: *const RadtailRun) -> usize {
    if run.is_null() {
        return 0;
    }
    (*run).0.series.len()
}

/// Radius and sample count of series `index`.
///
/// # Safety
/// `run`, `r_obs` and `len` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn radtail_run_series_info(
    run: *const RadtailRun,
    index: usize,
    r_obs: *mut f64,
    len: *mut usize,
) -> RadtailStatus {
    if run.is_null() || r_obs.is_null() || len.is_null() {
        return null_status("run, r_obs or len");
    }
    guard(|| {
        let run = &*run;
        let s = run.0.series.get(index).ok_or_else(|| Error::InvalidArgument(format!("no series {index}")))?;
        *r_obs = s.r_obs;
        *len = s.len();
        Ok(())
    })
}

/// Copies series `index` into `t` and `phi`, each with room for `cap`
/// values.
///
/// # Safety
/// `run` must be valid; `t` and `phi` writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn radtail_run_series_copy(
    run: *const RadtailRun,
    index: usize,
    t: *mut f64,
    phi: *mut f64,
    cap: usize,
) -> RadtailStatus {
    if run.is_null() || t.is_null() || phi.is_null() {
        return null_status("run, t or phi");
    }
    guard(|| {
        let run = &*run;
        let s = run.0.series.get(index).ok_or_else(|| Error::InvalidArgument(format!("no series {index}")))?;
        if cap < s.len() {
            return Err(Error::InvalidArgument(format!("capacity {cap} below series length {}", s.len())));
        }
        for (i, (a, b)) in s.samples().iter().enumerate() {
            *t.add(i) = *a;
            *phi.add(i) = *b;
        }
        Ok(())
    })
}

/// Evolves, fits the tail at the analysed radius and compares it with the
/// prediction, as `radtail verify` does, without writing files.
///
/// # Safety
/// `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn radtail_verify(cfg: *const RadtailConfig, out: *mut RadtailVerification) -> RadtailStatus {
    if cfg.is_null() || out.is_null() {
        return null_status("cfg or out");
    }
    guard(|| {
        let c = &(*cfg).0;
        let model = c.model.resolve()?;
        let pred = predict(&model, &c.profile.build::<DoubleDouble>()?)?;
        let res = with_wave(c, |w| run(&model, w, &c.evolve), |w| run(&model, w, &c.evolve))?;
        let r = c.analysis.r_obs.unwrap_or(c.evolve.observation_radii[0]);
        let i = c.evolve.observation_radii.iter().position(|x| *x == r).unwrap_or(0);
        let rep = compare(&res.series[i], &pred, &c.analysis.tolerances(), c.fit_window());
        *out = RadtailVerification {
            verdict: match rep.verdict {
                Verdict::Pass => RadtailVerdict::Pass,
                Verdict::Fail => RadtailVerdict::Fail,
                Verdict::Inconclusive => RadtailVerdict::Inconclusive,
            },
            prediction: to_c_prediction(&pred),
            fitted_gamma: rep.fitted_gamma.map_or(f64::NAN, |g| g.0),
            fitted_amplitude: rep.fitted_amplitude.map_or(f64::NAN, |a| a.amplitude),
            recommended_t_final: rep.recommended_t_final.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Perturbative iterate selected by `[perturb] iterate` at the `n` points
/// `(t[i], r[i])`, written to `out`. The configured `[perturb] points` are
/// ignored.
///
/// # Safety
/// `cfg` must be valid; `t`, `r` readable and `out` writable for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn radtail_perturb(
    cfg: *const RadtailConfig,
    t: *const f64,
    r: *const f64,
    n: usize,
    out: *mut f64,
) -> RadtailStatus {
    if cfg.is_null() || t.is_null() || r.is_null() || out.is_null() {
        return null_status("cfg, t, r or out");
    }
    guard(|| {
        let c = &(*cfg).0;
        let model = c.model.resolve()?;
        let ts = std::slice::from_raw_parts(t, n);
        let rs = std::slice::from_raw_parts(r, n);
        let stage = c.perturb.iterate.stage();
        let k = if c.perturb.iterate == IterateKind::First { 1 } else { 2 };
        let values: Vec<f64> = with_wave(
            c,
            |w| {
                let pts: Vec<(f64, f64)> = ts.iter().copied().zip(rs.iter().copied()).collect();
                let opts = c.perturb.options(Precision::Standard);
                let table = if model.is_linear() {
                    iterate_linear(&model, w, k, &pts, &opts)?
                } else {
                    iterate_nonlinear(&model, w, stage, &pts, &opts)?
                };
                Ok(table.values)
            },
            |w| {
                let pts: Vec<(DoubleDouble, DoubleDouble)> =
                    ts.iter().zip(rs).map(|(a, b)| (DoubleDouble::from_f64(*a), DoubleDouble::from_f64(*b))).collect();
                let opts = c.perturb.options(Precision::Extended);
                let table = if model.is_linear() {
                    iterate_linear(&model, w, k, &pts, &opts)?
                } else {
                    iterate_nonlinear(&model, w, stage, &pts, &opts)?
                };
                Ok(table.values.iter().map(|v| v.to_f64()).collect())
            },
        )?;
        ptr::copy_nonoverlapping(values.as_ptr(), out, n);
        Ok(())
    })
}

/// Free wave generated by the bump `a(u) = amplitude (u-u0)^m (u1-u)^m`
/// (normalized to peak 1 when `amplitude` is NaN) in `d = 2l+3`, evaluated
/// in double-double precision at `(t, r)`, including `r = 0`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn radtail_free_wave(
    l: u32,
    u0: f64,
    u1: f64,
    m: u32,
    amplitude: f64,
    t: f64,
    r: f64,
    out: *mut f64,
) -> RadtailStatus {
    if out.is_null() {
        return null_status("out");
    }
    guard(|| {
        if !(r >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("(t, r) = ({t}, {r}) is outside t finite, r >= 0")));
        }
        let d = |x: f64| DoubleDouble::from_f64(x);
        let p = if amplitude.is_nan() {
            Profile::normalized(d(u0), d(u1), m, DoubleDouble::one())?
        } else {
            Profile::new(d(u0), d(u1), m, d(amplitude))?
        };
        let w = FreeWave::new(p, l)?;
        *out = w.eval_regular(d(t), d(r)).to_f64();
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Blowup { time: 1.0 }), RadtailStatus::Blowup);
        assert_eq!(status_of(&Error::Config("x".into())), RadtailStatus::Config);
        assert_eq!(guard(|| Err(Error::InvalidArgument("x".into()))), RadtailStatus::InvalidArgument);
    }

    #[test]
    fn panics_are_caught() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, RadtailStatus::Panic);
        let msg = unsafe { CStr::from_ptr(radtail_last_error()) }.to_str().unwrap().to_string();
        assert!(msg.contains("boom"), "{msg}");
    }
}
