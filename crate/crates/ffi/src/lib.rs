//! C interface to `spinc`.
//!
//! Objects cross the boundary as opaque handles created and destroyed by this
//! library. Every fallible call returns a [`SpincStatus`]; the message of the
//! last failure on the calling thread is available from
//! [`spinc_last_error_message`]. Strings returned to C must be released with
//! [`spinc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use spinc::clifford::{AlgebraSignature, Multivector};
use spinc::config::exit_code;
use spinc::pipeline::{self, Gauge, RunSummary, ScenarioConfig};
use spinc::scenarios;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpincStatus {
    Ok = 0,
    /// A verification ran and at least one check failed.
    CheckFailed = 1,
    InvalidInput = 2,
    NullPointer = 3,
    /// Unexpected internal failure (a caught panic).
    Internal = 4,
}

/// Multivector in a complexified Clifford algebra.
pub struct SpincMultivector(Multivector);

/// Result of a scenario verification run.
pub struct SpincRunSummary(RunSummary);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: SpincStatus, message: impl Into<String>) -> SpincStatus {
    set_error(message);
    status
}

fn from_error(error: &spinc::Error) -> SpincStatus {
    let status = match exit_code(error) {
        2 => SpincStatus::InvalidInput,
        _ => SpincStatus::CheckFailed,
    };
    fail(status, error.to_string())
}

fn guard(body: impl FnOnce() -> SpincStatus) -> SpincStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(SpincStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, SpincStatus> {
    if p.is_null() {
        return Err(fail(SpincStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SpincStatus::InvalidInput, "string is not valid UTF-8"))
}

fn into_c_string(text: String) -> *mut c_char {
    CString::new(text).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the most recent failure on this thread, or NULL if none.
/// Release the result with [`spinc_string_free`].
#[no_mangle]
pub extern "C" fn spinc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spinc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Zero multivector of `Cl(n+m)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn spinc_multivector_new(n: usize, m: usize, out: *mut *mut SpincMultivector) -> SpincStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpincStatus::NullPointer, "null output handle");
        }
        match AlgebraSignature::new(n, m) {
            Ok(sig) => {
                *out = Box::into_raw(Box::new(SpincMultivector(Multivector::zero(sig))));
                SpincStatus::Ok
            }
            Err(e) => fail(SpincStatus::InvalidInput, e.to_string()),
        }
    })
}

/// # Safety
/// `mv` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn spinc_multivector_free(mv: *mut SpincMultivector) {
    if !mv.is_null() {
        drop(Box::from_raw(mv));
    }
}

/// Number of blades, `2^(n+m)`; 0 for a NULL handle.
///
/// # Safety
/// `mv` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spinc_multivector_blade_count(mv: *const SpincMultivector) -> usize {
    mv.as_ref().map_or(0, |m| m.0.coeffs().len())
}

/// Sets the coefficient of the blade with bitmask `blade`.
///
/// # Safety
/// `mv` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn spinc_multivector_set(mv: *mut SpincMultivector, blade: usize, re: f64, im: f64) -> SpincStatus {
    guard(|| {
        let Some(m) = mv.as_mut() else {
            return fail(SpincStatus::NullPointer, "null multivector");
        };
        if blade >= m.0.coeffs().len() {
            return fail(SpincStatus::InvalidInput, format!("blade {blade} out of range"));
        }
        if !(re.is_finite() && im.is_finite()) {
            return fail(SpincStatus::InvalidInput, "coefficient is not finite");
        }
        m.0.set_coeff(blade, Complex64::new(re, im));
        SpincStatus::Ok
    })
}

/// # Safety
/// `mv` must be a live handle; `re` and `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinc_multivector_get(
    mv: *const SpincMultivector,
    blade: usize,
    re: *mut f64,
    im: *mut f64,
) -> SpincStatus {
    guard(|| {
        let Some(m) = mv.as_ref() else {
            return fail(SpincStatus::NullPointer, "null multivector");
        };
        if re.is_null() || im.is_null() {
            return fail(SpincStatus::NullPointer, "null output pointer");
        }
        if blade >= m.0.coeffs().len() {
            return fail(SpincStatus::InvalidInput, format!("blade {blade} out of range"));
        }
        let c = m.0.coeff(blade);
        *re = c.re;
        *im = c.im;
        SpincStatus::Ok
    })
}

/// Geometric product `a b` as a new handle.
///
/// # Safety
/// `a`, `b` must be live handles and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinc_multivector_product(
    a: *const SpincMultivector,
    b: *const SpincMultivector,
    out: *mut *mut SpincMultivector,
) -> SpincStatus {
    guard(|| {
        let (Some(a), Some(b)) = (a.as_ref(), b.as_ref()) else {
            return fail(SpincStatus::NullPointer, "null multivector");
        };
        if out.is_null() {
            return fail(SpincStatus::NullPointer, "null output handle");
        }
        match a.0.product(&b.0) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(SpincMultivector(p)));
                SpincStatus::Ok
            }
            Err(e) => fail(SpincStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Conjugate-linear anti-automorphism `tau(a)` as a new handle.
///
/// # Safety
/// `a` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinc_multivector_tau(a: *const SpincMultivector, out: *mut *mut SpincMultivector) -> SpincStatus {
    guard(|| {
        let Some(a) = a.as_ref() else {
            return fail(SpincStatus::NullPointer, "null multivector");
        };
        if out.is_null() {
            return fail(SpincStatus::NullPointer, "null output handle");
        }
        *out = Box::into_raw(Box::new(SpincMultivector(a.0.tau())));
        SpincStatus::Ok
    })
}

/// Runs the algebra identity suite on dimensions 2..=`max_dim`.
///
/// # Safety
/// `passed` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinc_verify_algebra(seed: u64, trials: usize, max_dim: usize, passed: *mut bool) -> SpincStatus {
    guard(|| {
        if !(2..=spinc::clifford::MAX_DIM).contains(&max_dim) {
            return fail(SpincStatus::InvalidInput, format!("max_dim {max_dim} out of range"));
        }
        let dims: Vec<usize> = (2..=max_dim).collect();
        match pipeline::algebra_suite(seed, trials, &dims, None) {
            Ok(report) => {
                if let Some(p) = passed.as_mut() {
                    *p = report.passed;
                }
                match report.first_failure {
                    Some(name) => fail(SpincStatus::CheckFailed, name),
                    None => SpincStatus::Ok,
                }
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Verifies the named scenario on a grid with `axes` entries of `extents`.
/// `gauge` is `none`, `const:THETA`, `uv`, or NULL for none. A summary is
/// written to `out` whenever the run completes, including when checks fail
/// (status [`SpincStatus::CheckFailed`]).
///
/// # Safety
/// `scenario` and `gauge` must be NULL or NUL-terminated strings, `extents`
/// must point to `axes` readable values and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinc_verify_scenario(
    scenario: *const c_char,
    extents: *const usize,
    axes: usize,
    gauge: *const c_char,
    out: *mut *mut SpincRunSummary,
) -> SpincStatus {
    guard(|| {
        if out.is_null() || extents.is_null() {
            return fail(SpincStatus::NullPointer, "null argument");
        }
        let name = match read_str(scenario) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let gauge = if gauge.is_null() {
            Gauge::None
        } else {
            match read_str(gauge).map(str::parse::<Gauge>) {
                Ok(Ok(g)) => g,
                Ok(Err(e)) => return from_error(&e),
                Err(status) => return status,
            }
        };
        let extents = std::slice::from_raw_parts(extents, axes);
        let run = scenarios::by_name(name)
            .map_err(spinc::Error::from)
            .and_then(|s| ScenarioConfig::new(s, extents))
            .and_then(|c| pipeline::verify_scenario(&c.with_gauge(gauge)));
        match run {
            Ok(run) => {
                let summary = run.summary;
                let status = match &summary.first_failure {
                    Some(name) => fail(SpincStatus::CheckFailed, format!("check failed: {name}")),
                    None => SpincStatus::Ok,
                };
                *out = Box::into_raw(Box::new(SpincRunSummary(summary)));
                status
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `summary` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spinc_summary_free(summary: *mut SpincRunSummary) {
    if !summary.is_null() {
        drop(Box::from_raw(summary));
    }
}

/// # Safety
/// `summary` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spinc_summary_passed(summary: *const SpincRunSummary) -> bool {
    summary.as_ref().is_some_and(|s| s.0.passed)
}

/// Reads one numeric summary entry: `max_killing_residual`, `max_dxi`,
/// `metric_err`, `B_err`, `normconn_err`, `roundtrip_rms`,
/// `path_discrepancy` or `unit_defect`.
///
/// # Safety
/// `summary` must be a live handle, `key` a NUL-terminated string and
/// `value` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinc_summary_value(
    summary: *const SpincRunSummary,
    key: *const c_char,
    value: *mut f64,
) -> SpincStatus {
    guard(|| {
        let Some(s) = summary.as_ref() else {
            return fail(SpincStatus::NullPointer, "null summary");
        };
        if value.is_null() {
            return fail(SpincStatus::NullPointer, "null output pointer");
        }
        let key = match read_str(key) {
            Ok(k) => k,
            Err(status) => return status,
        };
        let s = &s.0;
        let v = match key {
            "max_killing_residual" => s.max_killing_residual,
            "max_dxi" => s.max_dxi,
            "metric_err" => s.metric_err,
            "B_err" => s.b_err,
            "normconn_err" => s.normconn_err.unwrap_or(0.0),
            "roundtrip_rms" => s.roundtrip_rms,
            "path_discrepancy" => s.path_discrepancy,
            "unit_defect" => s.unit_defect,
            _ => return fail(SpincStatus::InvalidInput, format!("unknown summary key '{key}'")),
        };
        *value = v;
        SpincStatus::Ok
    })
}

/// Summary as JSON; release with [`spinc_string_free`]. NULL on a NULL handle.
///
/// # Safety
/// `summary` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spinc_summary_json(summary: *const SpincRunSummary) -> *mut c_char {
    summary.as_ref().map_or(ptr::null_mut(), |s| {
        into_c_string(serde_json::to_string(&s.0).expect("plain data serializes"))
    })
}
