use std::ffi::{c_char, CStr, CString};
use std::ptr;

use qform_ffi::*;
use serde_json::Value;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> Value {
    assert!(!s.is_null());
    let v = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
    qf_string_free(s);
    v
}

unsafe fn last_error() -> String {
    let p = qf_last_error_message();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn catalog_space(name: &str) -> *mut QfSpace {
    let mut sp = ptr::null_mut();
    assert_eq!(qf_space_from_catalog(c(name).as_ptr(), &mut sp), QF_OK);
    sp
}

#[test]
fn ring_and_space_handles() {
    unsafe {
        let mut ring = ptr::null_mut();
        let doc = c(r#"{"ring": {"residue": 3}, "sigma": "identity", "u": 1, "lambda": "min"}"#);
        assert_eq!(qf_ring_from_json(doc.as_ptr(), &mut ring), QF_OK);
        assert_eq!(qf_ring_size(ring), 3);
        let mut space = ptr::null_mut();
        let sdoc = c(r#"{"ring_ref": "r.json", "rank": 2, "gram": [[1, 0], [0, 1]]}"#);
        assert_eq!(qf_space_from_json(ring, sdoc.as_ptr(), &mut space), QF_OK);
        assert_eq!(qf_space_rank(space), 2);
        let mut uni = false;
        assert_eq!(qf_space_is_unimodular(space, &mut uni), QF_OK);
        assert!(uni);
        qf_space_free(space);
        qf_ring_free(ring);
    }
}

#[test]
fn status_codes() {
    unsafe {
        let mut ring = ptr::null_mut();
        assert_eq!(qf_ring_from_json(ptr::null(), &mut ring), QF_NULL_POINTER);
        assert_eq!(
            qf_ring_from_json(c("{").as_ptr(), &mut ring),
            QF_PARSE_ERROR
        );
        assert!(!last_error().is_empty());
        let bad = [0xffu8, 0];
        assert_eq!(
            qf_ring_from_json(bad.as_ptr().cast(), &mut ring),
            QF_INVALID_UTF8
        );
        let not_unit = c(r#"{"ring": {"residue": 4}, "u": 2}"#);
        assert_eq!(
            qf_ring_from_json(not_unit.as_ptr(), &mut ring),
            QF_PARSE_ERROR
        );
        assert!(ring.is_null());
        let mut space = ptr::null_mut();
        let orphan = c(r#"{"ring_ref": "r.json", "gram": [[1]]}"#);
        assert_eq!(
            qf_space_from_json(ptr::null(), orphan.as_ptr(), &mut space),
            QF_PARSE_ERROR
        );
        assert_eq!(
            qf_space_from_catalog(c("f3_plane").as_ptr(), ptr::null_mut()),
            QF_NULL_POINTER
        );
    }
}

#[test]
fn extend_swaps_lines() {
    unsafe {
        let space = catalog_space("f3_plane");
        let req = c(r#"{"q": [[1, 0], [0, 0]], "s": [[0, 0], [0, 1]], "iso": [[0, 0], [1, 0]]}"#);
        let mut out = ptr::null_mut();
        assert_eq!(qf_extend_json(space, req.as_ptr(), &mut out), QF_OK);
        let v = take(out);
        assert_eq!(v["route"], "witt-I");
        let phi = &v["phi"];
        assert_eq!(phi[1][0], 1);
        assert_eq!(phi[0][0], 0);
        let zero = c(r#"{"q": [[1, 0], [0, 0]], "s": [[0, 0], [0, 1]], "iso": [[0, 0], [0, 0]]}"#);
        let mut out = ptr::null_mut();
        assert_eq!(
            qf_extend_json(space, zero.as_ptr(), &mut out),
            QF_MATH_FAILURE
        );
        assert!(out.is_null());
        assert!(last_error().contains("isometry"));
        qf_space_free(space);
    }
}

#[test]
fn dickson_and_oracle_reports() {
    unsafe {
        let space = catalog_space("f3xf3_line");
        let mut out = ptr::null_mut();
        assert_eq!(qf_dickson_json(space, ptr::null(), &mut out), QF_OK);
        let v = take(out);
        assert_eq!(v["predicted_index"], 2);
        assert_eq!(v["measured_index"], 2);
        let mut out = ptr::null_mut();
        assert_eq!(
            qf_oracle_verify_json(space, c("all").as_ptr(), &mut out),
            QF_OK
        );
        assert_eq!(take(out)["passed"], true);
        let mut out = ptr::null_mut();
        assert_eq!(
            qf_oracle_verify_json(space, c("nonsense").as_ptr(), &mut out),
            QF_PARSE_ERROR
        );
        qf_set_enumeration_bound(1);
        let mut out = ptr::null_mut();
        assert_eq!(
            qf_oracle_verify_json(space, c("index").as_ptr(), &mut out),
            QF_BOUND_EXCEEDED
        );
        qf_set_enumeration_bound(qform::limits::DEFAULT_ENUMERATION_BOUND);
        qf_space_free(space);
    }
}

#[test]
fn validate_reports_violations() {
    unsafe {
        let mut out = ptr::null_mut();
        let doc = c(r#"{"ring": {"residue": 3}, "lambda": {"generators": [1]}}"#);
        assert_eq!(qf_validate_json(doc.as_ptr(), &mut out), QF_MATH_FAILURE);
        let v = take(out);
        assert_eq!(v["violations"].as_array().unwrap().len(), 1);
    }
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/qform.h");
    for name in [
        "qf_ring_from_json",
        "qf_space_from_json",
        "qf_space_is_unimodular",
        "qf_extend_json",
        "qf_dickson_json",
        "qf_oracle_verify_json",
        "qf_last_error_message",
        "qf_string_free",
        "typedef struct QfSpace QfSpace",
        "QF_BOUND_EXCEEDED",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
