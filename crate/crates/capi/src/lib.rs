//! C ABI over the exact-calculus engine: opaque handles, integer status
//! codes, and heap strings released through `gradform_string_free`.
//!
//! Every entry point catches panics, so a bug in the engine surfaces as
//! `GRADFORM_STATUS_PANIC` rather than unwinding across the FFI boundary.
//! The last error message is kept per thread and read back with
//! `gradform_last_error`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::{c_char, c_int, size_t};

use gradform::bundle::ProductBundle;
use gradform::cli::{bracket_report, curvature_report, decompose_report, lift_report};
use gradform::connection::Connection;
use gradform::error::Error;
use gradform::io::{parse_bundle_spec, parse_connection_spec};
use gradform::suite::{render_report, verify_suite};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GradformStatus {
    /// Success; for `gradform_verify`, the suite passed.
    Ok = 0,
    /// The suite ran to completion and found failing identities.
    SuiteFail = 1,
    /// Input text failed to parse.
    Parse = 2,
    /// Input parsed but failed validation (bad matrix, unknown suite, ...).
    Invalid = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
    /// A string argument was not valid UTF-8.
    Utf8 = 5,
    /// Internal panic; the message goes to `gradform_last_error`.
    Panic = 6,
}

/// Opaque connection handle.
pub struct GradformConnection {
    inner: Connection,
}

/// Opaque product-bundle handle.
pub struct GradformBundle {
    inner: ProductBundle,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> GradformStatus {
    match err {
        Error::Parse(_) => GradformStatus::Parse,
        _ => GradformStatus::Invalid,
    }
}

fn guard<F: FnOnce() -> GradformStatus>(f: F) -> GradformStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            GradformStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, GradformStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(GradformStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8".into());
        GradformStatus::Utf8
    })
}

fn write_string(text: String, out: *mut *mut c_char) -> GradformStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return GradformStatus::NullArgument;
    }
    let c = CString::new(text.replace('\0', " ")).unwrap_or_default();
    unsafe { *out = c.into_raw() };
    GradformStatus::Ok
}

/// The last error message on this thread, or null. Borrowed; do not free.
#[no_mangle]
pub extern "C" fn gradform_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Static version string; do not free.
#[no_mangle]
pub extern "C" fn gradform_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned by any report function.
///
/// # Safety
/// `text` must be null or a pointer previously returned by this library.
#[no_mangle]
pub unsafe extern "C" fn gradform_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Parse a JSON connection spec (`dim`, `coords`, `phi`) and validate it.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the handle until
/// `gradform_connection_free`.
#[no_mangle]
pub unsafe extern "C" fn gradform_connection_parse(
    json: *const c_char,
    out: *mut *mut GradformConnection,
) -> GradformStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return GradformStatus::NullArgument;
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_connection_spec(text) {
            Ok(conn) => {
                *out = Box::into_raw(Box::new(GradformConnection { inner: conn }));
                GradformStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `conn` must be null or a handle from `gradform_connection_parse`,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gradform_connection_free(conn: *mut GradformConnection) {
    if !conn.is_null() {
        drop(Box::from_raw(conn));
    }
}

/// Vertical rank of the connection, or -1 on a null handle.
///
/// # Safety
/// `conn` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gradform_connection_rank(conn: *const GradformConnection) -> c_int {
    if conn.is_null() {
        return -1;
    }
    (*conn).inner.rank() as c_int
}

/// Chart dimension of the connection, or -1 on a null handle.
///
/// # Safety
/// `conn` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gradform_connection_dim(conn: *const GradformConnection) -> c_int {
    if conn.is_null() {
        return -1;
    }
    (*conn).inner.chart().dim() as c_int
}

unsafe fn connection_text<F>(
    conn: *const GradformConnection,
    out: *mut *mut c_char,
    f: F,
) -> GradformStatus
where
    F: FnOnce(&Connection) -> Result<String, Error>,
{
    guard(|| {
        if conn.is_null() {
            set_error("null connection handle".into());
            return GradformStatus::NullArgument;
        }
        match f(&(*conn).inner) {
            Ok(text) => write_string(text, out),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Curvature report (same text as `gradform curvature`).
///
/// # Safety
/// `conn` must be a live handle; `out` a valid pointer. Free `*out` with
/// `gradform_string_free`.
#[no_mangle]
pub unsafe extern "C" fn gradform_connection_report(
    conn: *const GradformConnection,
    out: *mut *mut c_char,
) -> GradformStatus {
    connection_text(conn, out, |c| Ok(curvature_report(c)))
}

/// Bracket table report (same text as `gradform bracket`).
///
/// # Safety
/// As for `gradform_connection_report`.
#[no_mangle]
pub unsafe extern "C" fn gradform_connection_brackets(
    conn: *const GradformConnection,
    out: *mut *mut c_char,
) -> GradformStatus {
    connection_text(conn, out, bracket_report)
}

/// Decomposition report for [d, h*] (same text as `gradform decompose`).
///
/// # Safety
/// As for `gradform_connection_report`.
#[no_mangle]
pub unsafe extern "C" fn gradform_connection_decompose(
    conn: *const GradformConnection,
    out: *mut *mut c_char,
) -> GradformStatus {
    connection_text(conn, out, decompose_report)
}

/// Curvature of the connection in the canonical form grammar.
///
/// # Safety
/// As for `gradform_connection_report`.
#[no_mangle]
pub unsafe extern "C" fn gradform_connection_curvature(
    conn: *const GradformConnection,
    out: *mut *mut c_char,
) -> GradformStatus {
    connection_text(conn, out, |c| Ok(format!("{}\n", c.curvature())))
}

/// Cocurvature of the connection in the canonical form grammar.
///
/// # Safety
/// As for `gradform_connection_report`.
#[no_mangle]
pub unsafe extern "C" fn gradform_connection_cocurvature(
    conn: *const GradformConnection,
    out: *mut *mut c_char,
) -> GradformStatus {
    connection_text(conn, out, |c| Ok(format!("{}\n", c.cocurvature())))
}

/// Parse a JSON bundle spec (`base_coords`, `fiber_coords`, `gamma`).
///
/// # Safety
/// As for `gradform_connection_parse`.
#[no_mangle]
pub unsafe extern "C" fn gradform_bundle_parse(
    json: *const c_char,
    out: *mut *mut GradformBundle,
) -> GradformStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return GradformStatus::NullArgument;
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_bundle_spec(text) {
            Ok(pb) => {
                *out = Box::into_raw(Box::new(GradformBundle { inner: pb }));
                GradformStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `pb` must be null or a handle from `gradform_bundle_parse`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gradform_bundle_free(pb: *mut GradformBundle) {
    if !pb.is_null() {
        drop(Box::from_raw(pb));
    }
}

/// Lift report for a product bundle (same text as `gradform lift`).
///
/// # Safety
/// `pb` must be a live handle; `out` a valid pointer. Free `*out` with
/// `gradform_string_free`.
#[no_mangle]
pub unsafe extern "C" fn gradform_bundle_lift_report(
    pb: *const GradformBundle,
    out: *mut *mut c_char,
) -> GradformStatus {
    guard(|| {
        if pb.is_null() {
            set_error("null bundle handle".into());
            return GradformStatus::NullArgument;
        }
        match lift_report(&(*pb).inner) {
            Ok(text) => write_string(text, out),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Run a registered identity suite and return the rendered report.
/// `dims` may be null when `dims_len` is 0, in which case dimension 3 is
/// used. Returns `Ok` for a passing suite, `SuiteFail` when identities
/// failed (the report still describes them).
///
/// # Safety
/// `suite_id` must be a valid NUL-terminated string; `dims` must point to
/// `dims_len` readable entries when non-null; `out_report` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gradform_verify(
    suite_id: *const c_char,
    dims: *const size_t,
    dims_len: size_t,
    trials: u32,
    seed: u64,
    out_report: *mut *mut c_char,
) -> GradformStatus {
    guard(|| {
        let id = match read_str(suite_id) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let dims_vec: Vec<usize> = if dims.is_null() || dims_len == 0 {
            vec![3]
        } else {
            std::slice::from_raw_parts(dims, dims_len).to_vec()
        };
        match verify_suite(id, &dims_vec, trials, seed) {
            Ok(report) => {
                let status = if report.passed() {
                    GradformStatus::Ok
                } else {
                    GradformStatus::SuiteFail
                };
                let write = write_string(render_report(&report), out_report);
                if write != GradformStatus::Ok {
                    return write;
                }
                status
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}
