//! C ABI over `qform`. Handles are opaque; reports cross the boundary as JSON strings.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qform::cli::{self, Check, Report};
use qform::forms::{PresentedModule, QuadraticSpace};
use qform::io::space_from_json;
use qform::matrix::Mat;
use qform::ring::UnitaryRing;
use qform::{catalog, limits, Error};
use serde_json::Value;

pub type QfStatus = i32;

pub const QF_OK: QfStatus = 0;
pub const QF_NULL_POINTER: QfStatus = 1;
pub const QF_INVALID_UTF8: QfStatus = 2;
pub const QF_PARSE_ERROR: QfStatus = 3;
/// The computation ran and reports a mathematical failure; a report is still returned.
pub const QF_MATH_FAILURE: QfStatus = 4;
pub const QF_BOUND_EXCEEDED: QfStatus = 5;
pub const QF_INTERNAL: QfStatus = 6;

/// A unitary ring (A, σ, u, Λ).
pub struct QfRing(UnitaryRing);

/// A quadratic space over a unitary ring.
pub struct QfSpace(QuadraticSpace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> QfStatus {
    match err {
        Error::EnumerationBoundExceeded { .. } | Error::OversizeRing { .. } => QF_BOUND_EXCEEDED,
        e if e.is_input_error() => QF_PARSE_ERROR,
        _ => QF_MATH_FAILURE,
    }
}

enum Failure {
    Status(QfStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<QfStatus, Failure>) -> QfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure::Status(code, msg))) => {
            set_error(&msg);
            code
        }
        Ok(Err(Failure::Lib(err))) => {
            set_error(&err.to_string());
            status_of(&err)
        }
        Err(_) => {
            set_error("internal panic");
            QF_INTERNAL
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Status(QF_NULL_POINTER, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(QF_INVALID_UTF8, format!("{what} is not UTF-8")))
}

unsafe fn json_arg(p: *const c_char, what: &str) -> Result<Value, Failure> {
    let s = text(p, what)?;
    serde_json::from_str(s).map_err(|e| Failure::Status(QF_PARSE_ERROR, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::Status(QF_NULL_POINTER, format!("{what} is null")))
}

unsafe fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Status(
            QF_NULL_POINTER,
            "output pointer is null".into(),
        ));
    }
    Ok(())
}

fn into_c_string(v: &Value) -> *mut c_char {
    CString::new(serde_json::to_string(v).expect("JSON serializes"))
        .expect("JSON has no NUL bytes")
        .into_raw()
}

unsafe fn emit(report: Report, out: *mut *mut c_char) -> Result<QfStatus, Failure> {
    *out = into_c_string(&report.body);
    if report.ok {
        Ok(QF_OK)
    } else {
        set_error("mathematical failure; see the report");
        Ok(QF_MATH_FAILURE)
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, Failure> {
    v.get(key)
        .ok_or_else(|| Failure::Status(QF_PARSE_ERROR, format!("request needs \"{key}\"")))
}

fn matrix(space: &QuadraticSpace, v: &Value) -> Result<Mat, Failure> {
    Ok(qform::io::matrix_from_json(
        space,
        &serde_json::json!({ "matrix": v }),
    )?)
}

/// Message for the last failing call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn qf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Sets the cap on enumerated candidates for oracle computations.
#[no_mangle]
pub extern "C" fn qf_set_enumeration_bound(bound: u64) {
    limits::set_enumeration_bound(bound);
}

/// Parses a unitary ring document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_ring_from_json(json: *const c_char, out: *mut *mut QfRing) -> QfStatus {
    guard(|| {
        check_out(out)?;
        let v = json_arg(json, "ring document")?;
        *out = Box::into_raw(Box::new(QfRing(UnitaryRing::from_json(&v)?)));
        Ok(QF_OK)
    })
}

/// Looks up a bundled ring by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_ring_from_catalog(
    name: *const c_char,
    out: *mut *mut QfRing,
) -> QfStatus {
    guard(|| {
        check_out(out)?;
        let name = text(name, "name")?;
        *out = Box::into_raw(Box::new(QfRing(catalog::ring(name)?)));
        Ok(QF_OK)
    })
}

/// # Safety
/// `ring` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qf_ring_free(ring: *mut QfRing) {
    if !ring.is_null() {
        drop(Box::from_raw(ring));
    }
}

/// Number of elements of the ring, or 0 for a null handle.
///
/// # Safety
/// `ring` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_ring_size(ring: *const QfRing) -> usize {
    ring.as_ref().map_or(0, |r| r.0.ring().size())
}

/// Parses a space document. A string `ring_ref` refers to `ring` when it is
/// non-null, or to a bundled ring as `catalog:<name>`.
///
/// # Safety
/// `ring` must be null or a live handle; `json` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_space_from_json(
    ring: *const QfRing,
    json: *const c_char,
    out: *mut *mut QfSpace,
) -> QfStatus {
    guard(|| {
        check_out(out)?;
        let v = json_arg(json, "space document")?;
        let given = ring.as_ref().map(|r| r.0.clone());
        let resolve = |s: &str| match (s.strip_prefix("catalog:"), &given) {
            (Some(name), _) => catalog::ring(name),
            (None, Some(r)) => Ok(r.clone()),
            (None, None) => Err(Error::MalformedSpec(format!(
                "ring_ref {s:?} needs a ring handle"
            ))),
        };
        *out = Box::into_raw(Box::new(QfSpace(space_from_json(&v, &resolve)?)));
        Ok(QF_OK)
    })
}

/// Looks up a bundled space by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_space_from_catalog(
    name: *const c_char,
    out: *mut *mut QfSpace,
) -> QfStatus {
    guard(|| {
        check_out(out)?;
        let name = text(name, "name")?;
        *out = Box::into_raw(Box::new(QfSpace(catalog::space(name)?)));
        Ok(QF_OK)
    })
}

/// # Safety
/// `space` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qf_space_free(space: *mut QfSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Rank k of the ambient free module A^k, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qf_space_rank(space: *const QfSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.rank())
}

/// # Safety
/// `space` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_space_is_unimodular(space: *const QfSpace, out: *mut bool) -> QfStatus {
    guard(|| {
        check_out(out)?;
        *out = handle(space, "space")?.0.is_unimodular()?;
        Ok(QF_OK)
    })
}

/// Axiom check of a ring or space document; writes a JSON report.
///
/// # Safety
/// `json` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_validate_json(json: *const c_char, out: *mut *mut c_char) -> QfStatus {
    guard(|| {
        check_out(out)?;
        let v = json_arg(json, "document")?;
        let report = cli::validate_value(&v, &|s: &str| match s.strip_prefix("catalog:") {
            Some(name) => catalog::ring(name),
            None => Err(Error::MalformedSpec(format!(
                "cannot resolve ring_ref {s:?}"
            ))),
        })?;
        emit(report, out)
    })
}

/// Extends ψ: Q → S to an isometry. The request is
/// `{"q": M, "s": M, "iso": M, "v": M?}` with matrix literals; writes
/// `{"phi", "route", "factors"?}`.
///
/// # Safety
/// `space` must be a live handle, `request` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_extend_json(
    space: *const QfSpace,
    request: *const c_char,
    out: *mut *mut c_char,
) -> QfStatus {
    guard(|| {
        check_out(out)?;
        let space = &handle(space, "space")?.0;
        let req = json_arg(request, "request")?;
        let r = space.ring();
        let q = PresentedModule::new(r, matrix(space, field(&req, "q")?)?)?;
        let s = PresentedModule::new(r, matrix(space, field(&req, "s")?)?)?;
        let iso = matrix(space, field(&req, "iso")?)?;
        let v = match req.get("v") {
            Some(m) => Some(PresentedModule::new(r, matrix(space, m)?)?),
            None => None,
        };
        emit(cli::extend_report(space, q, s, &iso, v)?, out)
    })
}

/// Δ_I of the isometry `iso` (a matrix literal), or the reflection subgroup report when `iso` is null.
///
/// # Safety
/// `space` must be a live handle, `iso` null or NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_dickson_json(
    space: *const QfSpace,
    iso: *const c_char,
    out: *mut *mut c_char,
) -> QfStatus {
    guard(|| {
        check_out(out)?;
        let space = &handle(space, "space")?.0;
        let psi = if iso.is_null() {
            None
        } else {
            Some(matrix(space, &json_arg(iso, "isometry")?)?)
        };
        emit(cli::dickson_report(space, psi.as_ref())?, out)
    })
}

/// Brute-force verification; `what` is "extension", "index", "dickson", "generation" or "all".
///
/// # Safety
/// `space` must be a live handle, `what` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qf_oracle_verify_json(
    space: *const QfSpace,
    what: *const c_char,
    out: *mut *mut c_char,
) -> QfStatus {
    guard(|| {
        check_out(out)?;
        let space = &handle(space, "space")?.0;
        let check = match text(what, "what")? {
            "extension" => Check::Extension,
            "index" => Check::Index,
            "dickson" => Check::Dickson,
            "generation" => Check::Generation,
            "all" => Check::All,
            other => {
                return Err(Failure::Status(
                    QF_PARSE_ERROR,
                    format!("unknown check {other:?}"),
                ))
            }
        };
        emit(cli::verify_report(space, check)?, out)
    })
}
