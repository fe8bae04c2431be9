//! C interface: opaque model and report handles, status codes, and a thread-local last error.
//!
//! Every function returning `KcStatus` writes its result through an out-pointer only on
//! `KC_STATUS_OK`. Strings handed out by the library are freed with `kc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kidcheck::cli::{run, KidSpec, ReportFile, RunConfig};
use kidcheck::geometry::curvature_pack;
use kidcheck::models::{Model, ModelSpec};
use kidcheck::operators::{sigma_residual, Sampling, SystemId};
use kidcheck::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Order = 4,
    SingularMetric = 5,
    Param = 6,
    Definiteness = 7,
    Model = 8,
    SelfCheck = 9,
    NoPeriodicOrbit = 10,
    Tolerance = 11,
    NonConstant = 12,
    Degenerate = 13,
    Config = 14,
    Io = 15,
    Panic = 16,
}

impl From<&Error> for KcStatus {
    fn from(e: &Error) -> KcStatus {
        match e {
            Error::Domain(_) => KcStatus::Domain,
            Error::Order { .. } => KcStatus::Order,
            Error::SingularMetric { .. } => KcStatus::SingularMetric,
            Error::Param(_) => KcStatus::Param,
            Error::Definiteness { .. } => KcStatus::Definiteness,
            Error::Model(_) => KcStatus::Model,
            Error::SelfCheck { .. } => KcStatus::SelfCheck,
            Error::NoPeriodicOrbit(_) => KcStatus::NoPeriodicOrbit,
            Error::Tolerance(_) => KcStatus::Tolerance,
            Error::NonConstant(_) => KcStatus::NonConstant,
            Error::Degenerate(_) => KcStatus::Degenerate,
            Error::Config(_) => KcStatus::Config,
            Error::Io(_) => KcStatus::Io,
        }
    }
}

/// A built model (metric, named fields, chart).
pub struct KcModel {
    inner: Model,
}

/// A finished command report.
pub struct KcReport {
    inner: ReportFile,
}

struct Failure(KcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(KcStatus::from(&e), e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            KcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(KcStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(KcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(KcStatus::NullPointer, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(KcStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn kc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn kc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a model from a descriptor such as `sphere:n=3,r=1`.
///
/// # Safety
/// `descriptor` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_model_new(descriptor: *const c_char, out: *mut *mut KcModel) -> KcStatus {
    guard(|| {
        out_arg(out, "out")?;
        let spec: ModelSpec = str_arg(descriptor, "descriptor")?.parse()?;
        let model = spec.build()?;
        *out = Box::into_raw(Box::new(KcModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `kc_model_new` and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kc_model_free(model: *mut KcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Chart dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_model_dim(model: *const KcModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.dim())
}

/// Scalar curvature at a chart point of length `dim`.
///
/// # Safety
/// `point` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_model_scal(
    model: *const KcModel,
    point: *const f64,
    len: usize,
    out: *mut f64,
) -> KcStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        out_arg(out, "out")?;
        if point.is_null() {
            return Err(Failure(KcStatus::NullPointer, "point is null".into()));
        }
        if len != m.inner.dim() {
            return Err(Error::Param(format!("point has {len} coordinates, chart has {}", m.inner.dim())).into());
        }
        let p = std::slice::from_raw_parts(point, len);
        *out = curvature_pack(&m.inner.metric, p)?.scal;
        Ok(())
    })
}

/// Sup-norm residual of a KID system (`sigma`, `sigma1`..`sigma4`) over `samples` seeded points.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_model_sigma_residual(
    model: *const KcModel,
    kid: *const c_char,
    system: *const c_char,
    samples: usize,
    seed: u64,
    out: *mut f64,
) -> KcStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        out_arg(out, "out")?;
        let kid = str_arg(kid, "kid")?.parse::<KidSpec>()?.build(&m.inner)?;
        let sys: SystemId = str_arg(system, "system")?.parse()?;
        if samples == 0 {
            return Err(Error::Param("samples must be positive".into()).into());
        }
        let s = Sampling::new(m.inner.chart(), samples, seed);
        let r = sigma_residual(sys, &m.inner.descriptor(), &m.inner.metric, &kid, &s, 1.0)?;
        *out = r.sup_norm;
        Ok(())
    })
}

/// Runs a command described by a TOML configuration and returns its report.
///
/// Module errors inside the run end up in the report, not in the status.
///
/// # Safety
/// `config_toml` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kc_run_toml(config_toml: *const c_char, out: *mut *mut KcReport) -> KcStatus {
    guard(|| {
        out_arg(out, "out")?;
        let cfg = RunConfig::from_toml(str_arg(config_toml, "config")?)?;
        cfg.validate()?;
        *out = Box::into_raw(Box::new(KcReport { inner: run(&cfg) }));
        Ok(())
    })
}

/// 1 if the report passed, 0 if not, -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_report_verdict(report: *const KcReport) -> c_int {
    report.as_ref().map_or(-1, |r| c_int::from(r.inner.verdict))
}

/// Number of error entries in the report, 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_report_error_count(report: *const KcReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.errors.len())
}

/// Report as JSON; with `canonical` nonzero the timestamp is blanked. Free with `kc_string_free`.
/// Returns null for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kc_report_json(report: *const KcReport, canonical: c_int) -> *mut c_char {
    let Some(r) = report.as_ref() else {
        set_last_error("report is null");
        return ptr::null_mut();
    };
    let json = if canonical != 0 {
        r.inner.canonical_json()
    } else {
        r.inner.to_json()
    };
    CString::new(json).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `report` must come from `kc_run_toml` and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kc_report_free(report: *mut KcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
