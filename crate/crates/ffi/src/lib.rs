//! C ABI over the session toolkit.
//!
//! The surface is deliberately small: parse a `.rms` source into an opaque
//! handle, then run the same operations the `rms` binary exposes. Results
//! cross the boundary as JSON or plain text in heap-allocated C strings the
//! caller releases with [`rms_string_free`]. Every fallible call returns an
//! [`RmsStatus`]; on any status other than `OK` (and `REJECTED`, which
//! still produces a report when an output slot is given) a human-readable
//! message is available from [`rms_last_error`] until the next failing
//! call on the same thread.
//!
//! The header `include/rms.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rms_core::cli::{check_doc, project_doc, script_outcome, verify_outcome};
use rms_core::parser::{parse_file, parse_script, print_source, SourceFile};
use rms_core::verify::Verdict;
use serde_json::json;

/// Status codes, aligned with the `rms` binary's exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmsStatus {
    /// The operation succeeded.
    Ok = 0,
    /// The operation ran but the subject was rejected: an ill-formed
    /// global, an undefined projection, a typing failure, a violated
    /// property, or a script directive that is not enabled.
    Rejected = 1,
    /// The source or script text does not parse.
    ParseError = 2,
    /// Reserved for I/O failures; the library itself never does I/O.
    IoError = 3,
    /// A null pointer, invalid UTF-8, or a name that does not exist.
    InvalidArgument = 4,
    /// An internal panic was caught at the boundary.
    InternalError = 5,
}

/// A parsed `.rms` source. Opaque; create with [`rms_parse`], release with
/// [`rms_source_free`].
pub struct RmsSource {
    src: SourceFile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_err(msg: impl Into<String>) {
    let c = CString::new(msg.into()).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_err() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// The message describing the most recent failure on this thread, or null.
/// The pointer is valid until the next failing call on the same thread; do
/// not free it.
#[no_mangle]
pub extern "C" fn rms_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The library version as a static string; do not free it.
#[no_mangle]
pub extern "C" fn rms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer previously returned in an output slot of
/// this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rms_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Releases a source handle.
///
/// # Safety
/// `src` must be null or a pointer from [`rms_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rms_source_free(src: *mut RmsSource) {
    if !src.is_null() {
        drop(Box::from_raw(src));
    }
}

unsafe fn str_in<'a>(p: *const c_char, what: &str) -> Result<&'a str, RmsStatus> {
    if p.is_null() {
        set_err(format!("{what} is null"));
        return Err(RmsStatus::InvalidArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_err(format!("{what} is not valid UTF-8"));
        RmsStatus::InvalidArgument
    })
}

unsafe fn opt_str_in<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, RmsStatus> {
    if p.is_null() {
        Ok(None)
    } else {
        str_in(p, what).map(Some)
    }
}

unsafe fn source_in<'a>(p: *const RmsSource) -> Result<&'a SourceFile, RmsStatus> {
    if p.is_null() {
        set_err("source handle is null");
        return Err(RmsStatus::InvalidArgument);
    }
    Ok(&(*p).src)
}

unsafe fn write_out(out: *mut *mut c_char, text: String) {
    if out.is_null() {
        return;
    }
    let c = CString::new(text).unwrap_or_else(|_| CString::new("").unwrap());
    *out = c.into_raw();
}

fn guard(f: impl FnOnce() -> RmsStatus) -> RmsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_err("internal panic");
            RmsStatus::InternalError
        }
    }
}

/// Parses `.rms` source text into a handle stored in `*out`.
///
/// On success `*out` owns the parsed source; on failure `*out` is null and
/// the parse error is available from [`rms_last_error`].
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn rms_parse(text: *const c_char, out: *mut *mut RmsSource) -> RmsStatus {
    guard(|| {
        if out.is_null() {
            set_err("output slot is null");
            return RmsStatus::InvalidArgument;
        }
        *out = ptr::null_mut();
        let text = match str_in(text, "source text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_file(text) {
            Ok(src) => {
                clear_err();
                *out = Box::into_raw(Box::new(RmsSource { src }));
                RmsStatus::Ok
            }
            Err(e) => {
                set_err(e.to_string());
                RmsStatus::ParseError
            }
        }
    })
}

/// Checks every global type for well-formedness and every annotated
/// session against its global pair. When `out_json` is non-null it
/// receives the full report. Returns `OK` when everything is accepted and
/// `REJECTED` otherwise.
///
/// # Safety
/// `src` must come from [`rms_parse`]; `out_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn rms_check(
    src: *const RmsSource,
    out_json: *mut *mut c_char,
) -> RmsStatus {
    guard(|| {
        let src = match source_in(src) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let (ok, doc) = check_doc(src);
        write_out(out_json, serde_json::to_string_pretty(&doc).expect("json"));
        if ok {
            clear_err();
            RmsStatus::Ok
        } else {
            set_err("check rejected the source");
            RmsStatus::Rejected
        }
    })
}

/// Projects the named global type onto one participant, or onto all of its
/// participants when `participant` is null. `out_json` receives the rows.
/// Returns `REJECTED` when some requested projection is undefined.
///
/// # Safety
/// `src` must come from [`rms_parse`]; `participant` and `out_json` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn rms_project(
    src: *const RmsSource,
    type_name: *const c_char,
    participant: *const c_char,
    out_json: *mut *mut c_char,
) -> RmsStatus {
    guard(|| {
        let src = match source_in(src) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let type_name = match str_in(type_name, "global type name") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let on = match opt_str_in(participant, "participant") {
            Ok(o) => o,
            Err(s) => return s,
        };
        match project_doc(src, type_name, on) {
            Ok((all_defined, doc)) => {
                write_out(out_json, serde_json::to_string_pretty(&doc).expect("json"));
                if all_defined {
                    clear_err();
                    RmsStatus::Ok
                } else {
                    set_err("some projection is undefined");
                    RmsStatus::Rejected
                }
            }
            Err(e) => {
                set_err(e);
                RmsStatus::InvalidArgument
            }
        }
    })
}

/// Pretty-prints the source back to canonical `.rms` text in `*out_text`.
///
/// # Safety
/// `src` must come from [`rms_parse`]; `out_text` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn rms_format(
    src: *const RmsSource,
    out_text: *mut *mut c_char,
) -> RmsStatus {
    guard(|| {
        let src = match source_in(src) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if out_text.is_null() {
            set_err("output slot is null");
            return RmsStatus::InvalidArgument;
        }
        write_out(out_text, print_source(src));
        clear_err();
        RmsStatus::Ok
    })
}

/// Runs bounded verification (subject reduction, session fidelity,
/// progress) on the named session, or on every annotated session when
/// `session_name` is null. `out_json` receives the per-session reports and
/// the overall verdict. Returns `REJECTED` when some property is violated;
/// an inconclusive (bound-exhausted) result is still `OK`.
///
/// # Safety
/// `src` must come from [`rms_parse`]; `session_name` and `out_json` may
/// be null.
#[no_mangle]
pub unsafe extern "C" fn rms_verify(
    src: *const RmsSource,
    session_name: *const c_char,
    depth: u32,
    state_cap: u32,
    out_json: *mut *mut c_char,
) -> RmsStatus {
    guard(|| {
        let src = match source_in(src) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let name = match opt_str_in(session_name, "session name") {
            Ok(o) => o,
            Err(s) => return s,
        };
        let targets: Vec<_> = match name {
            Some(n) => match src.session_decl(n) {
                Some(d) if d.pair.is_some() => vec![d],
                Some(_) => {
                    set_err(format!("session `{n}` has no global type annotation"));
                    return RmsStatus::InvalidArgument;
                }
                None => {
                    set_err(format!("no session named `{n}`"));
                    return RmsStatus::InvalidArgument;
                }
            },
            None => src.sessions.iter().filter(|d| d.pair.is_some()).collect(),
        };
        if targets.is_empty() {
            set_err("no annotated session to verify");
            return RmsStatus::InvalidArgument;
        }
        let mut overall = Verdict::Holds;
        let mut sessions = Vec::new();
        for d in targets {
            let gp = d.pair.as_ref().expect("filtered to annotated sessions");
            let (v, doc) =
                verify_outcome(&d.session, gp, depth as usize, state_cap as usize);
            match v {
                Verdict::Violated => overall = Verdict::Violated,
                Verdict::Inconclusive if overall == Verdict::Holds => {
                    overall = Verdict::Inconclusive
                }
                _ => {}
            }
            sessions.push(json!({ "name": d.name, "verify": doc }));
        }
        let doc = json!({ "sessions": sessions, "overall": overall });
        write_out(out_json, serde_json::to_string_pretty(&doc).expect("json"));
        if overall == Verdict::Violated {
            set_err("a property is violated");
            RmsStatus::Rejected
        } else {
            clear_err();
            RmsStatus::Ok
        }
    })
}

/// Runs a scheduler script against the source's network and writes the
/// step trace plus final states to `*out_text`. `script` is the script
/// text (`#`-commented directive lines); when null, the source's embedded
/// `script { ... }` block is used. Returns `REJECTED` when a directive is
/// not enabled, with the offending directive in [`rms_last_error`].
///
/// # Safety
/// `src` must come from [`rms_parse`]; `script` and `out_text` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn rms_simulate_script(
    src: *const RmsSource,
    script: *const c_char,
    out_text: *mut *mut c_char,
) -> RmsStatus {
    guard(|| {
        let src = match source_in(src) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let directives = match opt_str_in(script, "script text") {
            Ok(Some(text)) => match parse_script(text) {
                Ok(ds) => ds,
                Err(e) => {
                    set_err(e.to_string());
                    return RmsStatus::ParseError;
                }
            },
            Ok(None) => match &src.script {
                Some(ds) => ds.clone(),
                None => {
                    set_err("no script given and the source has no script block");
                    return RmsStatus::InvalidArgument;
                }
            },
            Err(s) => return s,
        };
        match script_outcome(src, &directives) {
            Ok(text) => {
                write_out(out_text, text);
                clear_err();
                RmsStatus::Ok
            }
            Err(e) => {
                set_err(e);
                RmsStatus::Rejected
            }
        }
    })
}
