//! C ABI over the ccx kernel: opaque document handles, error codes, and
//! string-returning operations so other languages can parse, check, replay
//! and run campaigns without linking Rust.
//!
//! Every returned string is owned by the library and must be released with
//! `ccx_string_free`. Documents are opaque and released with
//! `ccx_doc_free`. Functions return `CcxStatus`; on error the thread-local
//! message is available through `ccx_last_error`.

use ccx_core::ccx::{emit_ccx, parse_ccx, CcxDocument};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

/// Status codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcxStatus {
    Ok = 0,
    /// Parse error, invalid UTF-8, or malformed arguments.
    Invalid = 1,
    /// Checks ran and at least one failed.
    CheckFailed = 2,
    /// An internal construction failed; see `ccx_last_error`.
    Error = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Opaque parsed document.
pub struct CcxDoc {
    doc: CcxDocument,
}

/// Returns the last error message for this thread, or null when none.
/// The pointer is valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ccx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.as_ptr(),
        None => ptr::null(),
    })
}

/// Parses CCX text into an opaque document. On success writes the handle
/// through `out` and returns `Ok`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn ccx_doc_parse(text: *const c_char, out: *mut *mut CcxDoc) -> CcxStatus {
    if text.is_null() || out.is_null() {
        set_error("null argument".into());
        return CcxStatus::Invalid;
    }
    let Ok(s) = CStr::from_ptr(text).to_str() else {
        set_error("input is not valid UTF-8".into());
        return CcxStatus::Invalid;
    };
    match parse_ccx(s) {
        Ok(doc) => {
            *out = Box::into_raw(Box::new(CcxDoc { doc }));
            CcxStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            CcxStatus::Invalid
        }
    }
}

/// Releases a document handle. Null is ignored.
///
/// # Safety
/// `doc` must be a handle produced by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn ccx_doc_free(doc: *mut CcxDoc) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be a string produced by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn ccx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn string_out(text: String, out: *mut *mut c_char) -> CcxStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            CcxStatus::Ok
        }
        Err(_) => {
            set_error("report contained an interior NUL".into());
            CcxStatus::Error
        }
    }
}

/// Emits the canonical text form of a document.
///
/// # Safety
/// `doc` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccx_doc_emit(doc: *const CcxDoc, out: *mut *mut c_char) -> CcxStatus {
    if doc.is_null() || out.is_null() {
        set_error("null argument".into());
        return CcxStatus::Invalid;
    }
    string_out(emit_ccx(&(*doc).doc), out)
}

/// Runs the structural checks on every block. Writes a report and returns
/// `Ok` when everything passes, `CheckFailed` otherwise.
///
/// # Safety
/// `doc` must be a live handle; `report` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccx_doc_check(
    doc: *const CcxDoc,
    report: *mut *mut c_char,
) -> CcxStatus {
    if doc.is_null() || report.is_null() {
        set_error("null argument".into());
        return CcxStatus::Invalid;
    }
    let results = (*doc).doc.check_all();
    let ok = results.iter().all(|(_, r)| r.is_ok());
    let mut text = String::new();
    for (name, res) in results {
        match res {
            Ok(()) => text.push_str(&format!("CHECK {name} PASS\n")),
            Err(e) => text.push_str(&format!("CHECK {name} FAIL # {e}\n")),
        }
    }
    let status = string_out(text, report);
    if status != CcxStatus::Ok {
        return status;
    }
    if ok {
        CcxStatus::Ok
    } else {
        CcxStatus::CheckFailed
    }
}

/// Replays every certificate with matrix arithmetic only.
///
/// # Safety
/// `doc` must be a live handle; `report` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccx_doc_replay(
    doc: *const CcxDoc,
    report: *mut *mut c_char,
) -> CcxStatus {
    if doc.is_null() || report.is_null() {
        set_error("null argument".into());
        return CcxStatus::Invalid;
    }
    let results = (*doc).doc.replay_all();
    let ok = results.iter().all(|(_, r)| r.is_ok());
    let mut text = String::new();
    for (name, res) in results {
        match res {
            Ok(()) => text.push_str(&format!("REPLAY certificate {name} PASS\n")),
            Err(e) => text.push_str(&format!("REPLAY certificate {name} FAIL # {e}\n")),
        }
    }
    let status = string_out(text, report);
    if status != CcxStatus::Ok {
        return status;
    }
    if ok {
        CcxStatus::Ok
    } else {
        CcxStatus::CheckFailed
    }
}

/// Signature of a named point-controlled structure; writes the value
/// through `out`.
///
/// # Safety
/// `doc` must be a live handle; `name` a valid string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ccx_signature(
    doc: *const CcxDoc,
    name: *const c_char,
    out: *mut i64,
) -> CcxStatus {
    if doc.is_null() || name.is_null() || out.is_null() {
        set_error("null argument".into());
        return CcxStatus::Invalid;
    }
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        set_error("structure name is not valid UTF-8".into());
        return CcxStatus::Invalid;
    };
    let Some(q) = (*doc).doc.structure(name) else {
        set_error(format!("no structure `{name}`"));
        return CcxStatus::Invalid;
    };
    match ccx_core::signature::signature(q) {
        Ok(s) => {
            *out = s;
            CcxStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            CcxStatus::Error
        }
    }
}

/// Runs a named property campaign with the given seed and instance count;
/// writes the full report. Returns `Ok` when every instance passes.
///
/// # Safety
/// `prop` must be a valid string; `report` valid.
#[no_mangle]
pub unsafe extern "C" fn ccx_certify(
    prop: *const c_char,
    seed: u64,
    instances: usize,
    report: *mut *mut c_char,
) -> CcxStatus {
    if prop.is_null() || report.is_null() {
        set_error("null argument".into());
        return CcxStatus::Invalid;
    }
    let Ok(prop) = CStr::from_ptr(prop).to_str() else {
        set_error("property id is not valid UTF-8".into());
        return CcxStatus::Invalid;
    };
    let cfg = ccx_core::campaigns::CampaignConfig {
        seed,
        instances,
        ..Default::default()
    };
    match ccx_core::campaigns::run_campaign(prop, &cfg) {
        Some(r) => {
            let ok = r.all_pass();
            let status = string_out(r.render(), report);
            if status != CcxStatus::Ok {
                return status;
            }
            if ok {
                CcxStatus::Ok
            } else {
                CcxStatus::CheckFailed
            }
        }
        None => {
            set_error(format!("unknown property `{prop}`"));
            CcxStatus::Invalid
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "ccx 1\nring z\nspace X {\n  points a\n  row a 0\n}\ncomplex C over X {\n  radius 0\n  degree 0 basis a\n}\nstructure psi on C dim 0 radius 0 {\n  level 0 degree 0 radius 0 {\n    entry 0 0 1\n  }\n}\n";

    #[test]
    fn parse_check_signature_free_roundtrip() {
        let text = CString::new(SAMPLE).unwrap();
        let mut doc: *mut CcxDoc = ptr::null_mut();
        let status = unsafe { ccx_doc_parse(text.as_ptr(), &mut doc) };
        assert_eq!(status, CcxStatus::Ok);
        let mut report: *mut c_char = ptr::null_mut();
        let status = unsafe { ccx_doc_check(doc, &mut report) };
        assert_eq!(status, CcxStatus::Ok);
        unsafe { ccx_string_free(report) };
        let name = CString::new("psi").unwrap();
        let mut sig = 0i64;
        let status = unsafe { ccx_signature(doc, name.as_ptr(), &mut sig) };
        assert_eq!(status, CcxStatus::Ok);
        assert_eq!(sig, 1);
        let mut emitted: *mut c_char = ptr::null_mut();
        let status = unsafe { ccx_doc_emit(doc, &mut emitted) };
        assert_eq!(status, CcxStatus::Ok);
        unsafe { ccx_string_free(emitted) };
        unsafe { ccx_doc_free(doc) };
    }

    #[test]
    fn parse_error_sets_the_message() {
        let text = CString::new("not a document").unwrap();
        let mut doc: *mut CcxDoc = ptr::null_mut();
        let status = unsafe { ccx_doc_parse(text.as_ptr(), &mut doc) };
        assert_eq!(status, CcxStatus::Invalid);
        let err = ccx_last_error();
        assert!(!err.is_null());
        let msg = unsafe { CStr::from_ptr(err) }.to_str().unwrap();
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn campaign_through_the_c_surface() {
        let prop = CString::new("2.8").unwrap();
        let mut report: *mut c_char = ptr::null_mut();
        let status = unsafe { ccx_certify(prop.as_ptr(), 7, 2, &mut report) };
        assert_eq!(status, CcxStatus::Ok);
        let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_string();
        assert!(text.contains("PROP 2.8 INSTANCE 0"));
        unsafe { ccx_string_free(report) };
    }
}
