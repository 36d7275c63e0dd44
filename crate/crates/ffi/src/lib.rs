//! C ABI over the sobolev-growth library.
//!
//! Every fallible function returns an [`SgStatus`]; on failure the message is
//! available from [`sg_last_error`] on the same thread. Handles are opaque and
//! released with their `_free` function. Strings returned to the caller are
//! released with [`sg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sobolev_growth::harness::{evaluate_constants, run_experiment, ExperimentConfig, ExperimentReport};
use sobolev_growth::model::{integrate_channel, ChannelOrbit, ChannelSpec};
use sobolev_growth::resonance::compute_gamma_sqrt2;
use sobolev_growth::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Numerical = 3,
    Io = 4,
    Internal = 5,
}

impl SgStatus {
    fn of(e: &Error) -> Self {
        match e {
            Error::Stage { source, .. } => Self::of(source),
            Error::SmallDivisor { .. }
            | Error::NoDiophantineVector { .. }
            | Error::QuadratureMismatch { .. }
            | Error::BlowUp { .. }
            | Error::Integration(_) => SgStatus::Numerical,
            Error::Io(_) => SgStatus::Io,
            Error::Json(_) => SgStatus::Internal,
            _ => SgStatus::InvalidArgument,
        }
    }
}

/// Diffusion channel orbit.
pub struct SgChannel {
    orbit: ChannelOrbit,
}

/// Result of a full experiment run.
pub struct SgReport {
    report: ExperimentReport,
}

/// Threshold constants; natural logarithms where the value overflows, NaN
/// where it is undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgConstants {
    pub p: u32,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub log_mu0: f64,
    pub log_c0: f64,
    pub log_c1: f64,
    pub log_c1_tilde: f64,
    pub log_xi: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub log_c_plus: f64,
    pub log_c_minus: f64,
    pub log_f_gamma: f64,
    pub checks_hold: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard<F: FnOnce() -> Result<(), (SgStatus, String)>>(f: F) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside sobolev-growth");
            SgStatus::Internal
        }
    }
}

fn fail(e: Error) -> (SgStatus, String) {
    (SgStatus::of(&e), e.to_string())
}

fn null(name: &str) -> (SgStatus, String) {
    (SgStatus::NullPointer, format!("`{name}` is null"))
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `min n |sqrt(2) n + m|` over `1 <= n <= n_bound`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_gamma_sqrt2(n_bound: u64, out: *mut f64) -> SgStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = compute_gamma_sqrt2(n_bound).gamma;
        Ok(())
    })
}

fn channel_out(spec: ChannelSpec, out: *mut *mut SgChannel) -> Result<(), (SgStatus, String)> {
    let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
    let orbit = integrate_channel(&spec).map_err(fail)?;
    *out = Box::into_raw(Box::new(SgChannel { orbit }));
    Ok(())
}

/// Integrates the wave channel `(1, p)` at height `c` from `I_p = eps`.
///
/// # Safety
/// `out` must be valid for writes; the handle is released with [`sg_channel_free`].
#[no_mangle]
pub unsafe extern "C" fn sg_channel_new_wave(p: u32, c: f64, eps: f64, out: *mut *mut SgChannel) -> SgStatus {
    guard(|| channel_out(ChannelSpec::wave(p, c, eps), out))
}

/// Integrates the NLS channel on the tangential modes `k[0..4]`.
///
/// # Safety
/// `k` must point to four readable values and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_channel_new_nls(
    k: *const i64,
    c: f64,
    eps: f64,
    out: *mut *mut SgChannel,
) -> SgStatus {
    guard(|| {
        if k.is_null() {
            return Err(null("k"));
        }
        let k = unsafe { std::slice::from_raw_parts(k, 4) };
        channel_out(ChannelSpec::nls([k[0], k[1], k[2], k[3]], c, eps), out)
    })
}

/// Diffusion time of the orbit.
///
/// # Safety
/// `channel` must come from a channel constructor; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_channel_t0(channel: *const SgChannel, out: *mut f64) -> SgStatus {
    guard(|| {
        let ch = unsafe { channel.as_ref() }.ok_or_else(|| null("channel"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = ch.orbit.t0;
        Ok(())
    })
}

/// Analytic bracket of the diffusion time. Any output pointer may be null.
///
/// # Safety
/// `channel` must come from a channel constructor; non-null outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_channel_bounds(
    channel: *const SgChannel,
    lower: *mut f64,
    upper: *mut f64,
    lower_slack: *mut f64,
) -> SgStatus {
    guard(|| {
        let ch = unsafe { channel.as_ref() }.ok_or_else(|| null("channel"))?;
        let b = ch.orbit.bounds;
        for (ptr, v) in [(lower, b.lower), (upper, b.upper), (lower_slack, b.lower_slack)] {
            if let Some(slot) = unsafe { ptr.as_mut() } {
                *slot = v;
            }
        }
        Ok(())
    })
}

/// Copies the final actions into `out[0..len]` and stores their count in
/// `count`. Fails with `SG_STATUS_INVALID_ARGUMENT` when `len` is too small.
///
/// # Safety
/// `out` must be valid for `len` writes and `count` for one.
#[no_mangle]
pub unsafe extern "C" fn sg_channel_final_actions(
    channel: *const SgChannel,
    out: *mut f64,
    len: usize,
    count: *mut usize,
) -> SgStatus {
    guard(|| {
        let ch = unsafe { channel.as_ref() }.ok_or_else(|| null("channel"))?;
        let count = unsafe { count.as_mut() }.ok_or_else(|| null("count"))?;
        let actions = ch.orbit.final_actions();
        *count = actions.len();
        if len < actions.len() {
            return Err((
                SgStatus::InvalidArgument,
                format!("buffer holds {len} values, {} needed", actions.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let buf = unsafe { std::slice::from_raw_parts_mut(out, len) };
        buf[..actions.len()].copy_from_slice(&actions);
        Ok(())
    })
}

/// # Safety
/// `channel` must come from a channel constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sg_channel_free(channel: *mut SgChannel) {
    if !channel.is_null() {
        drop(unsafe { Box::from_raw(channel) });
    }
}

/// Evaluates the threshold constants; `c_minus <= 0` selects the default.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_constants_evaluate(p: u32, gamma: f64, c_minus: f64, out: *mut SgConstants) -> SgStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let k = evaluate_constants(p, gamma, (c_minus > 0.0).then_some(c_minus)).map_err(fail)?;
        *out = SgConstants {
            p: k.p,
            gamma: k.gamma,
            a: k.a,
            b: k.b.unwrap_or(f64::NAN),
            log_mu0: k.log_mu0.unwrap_or(f64::NAN),
            log_c0: k.log_c0,
            log_c1: k.log_c1,
            log_c1_tilde: k.log_c1_tilde,
            log_xi: k.log_xi,
            sigma1: k.sigma1,
            sigma2: k.sigma2,
            log_c_plus: k.log_c_plus,
            log_c_minus: k.log_c_minus,
            log_f_gamma: k.log_f_gamma.unwrap_or(f64::NAN),
            checks_hold: k.all_checks_hold(),
        };
        Ok(())
    })
}

/// Runs the experiment described by a TOML config.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out` must be valid for
/// writes. The report is released with [`sg_report_free`].
#[no_mangle]
pub unsafe extern "C" fn sg_experiment_run(config_toml: *const c_char, out: *mut *mut SgReport) -> SgStatus {
    guard(|| {
        if config_toml.is_null() {
            return Err(null("config_toml"));
        }
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let text = unsafe { CStr::from_ptr(config_toml) }
            .to_str()
            .map_err(|e| (SgStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
        let cfg = ExperimentConfig::from_toml(text).map_err(fail)?;
        let run = run_experiment(&cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(SgReport { report: run.report }));
        Ok(())
    })
}

/// `||z(T)||_s / ||z(0)||_s`.
///
/// # Safety
/// `report` must come from [`sg_experiment_run`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_report_ratio(report: *const SgReport, out: *mut f64) -> SgStatus {
    guard(|| {
        let r = unsafe { report.as_ref() }.ok_or_else(|| null("report"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *out = r.report.norms.ratio;
        Ok(())
    })
}

/// Serializes the report; the string is released with [`sg_string_free`].
///
/// # Safety
/// `report` must come from [`sg_experiment_run`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_report_to_json(report: *const SgReport, out: *mut *mut c_char) -> SgStatus {
    guard(|| {
        let r = unsafe { report.as_ref() }.ok_or_else(|| null("report"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let json = serde_json::to_string_pretty(&r.report).map_err(|e| fail(e.into()))?;
        *out = CString::new(json)
            .map_err(|e| (SgStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`sg_experiment_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sg_report_free(report: *mut SgReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
