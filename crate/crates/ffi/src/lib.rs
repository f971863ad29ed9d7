//! C ABI for the tropedwards library.
//!
//! Conventions:
//! - `TeConfig` is an opaque handle created by [`te_config_new`] and
//!   released by [`te_config_free`].
//! - Commands return an error code (`TE_OK` = 0) and hand results back
//!   as malloc'd NUL-terminated JSON or SVG strings through an out
//!   pointer; release those with [`te_string_free`].
//! - On failure the thread-local message from [`te_last_error`]
//!   describes the problem; error codes mirror the CLI exit codes
//!   (2 precision, 3 degenerate/refused input, 4 parse/schema).
//!
//! Every numeric value inside returned JSON is an exact rational pair
//! [num, den]; outputs are byte-deterministic for fixed inputs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tropedwards::error::Error;
use tropedwards::pipeline;
use tropedwards::rational::{rat, Rat};
use tropedwards::report;
use tropedwards::svg;
use tropedwards::DEFAULT_HORIZON;

/// Success.
pub const TE_OK: i32 = 0;
/// Unexpected internal failure (null argument, invalid UTF-8, panic).
pub const TE_ERR_INTERNAL: i32 = 1;
/// A truncation did not determine the requested quantity.
pub const TE_ERR_PRECISION: i32 = 2;
/// Degenerate or refused input (non-smooth curve, undefined delta, ...).
pub const TE_ERR_REFUSED: i32 = 3;
/// Expression or JSON input failed to parse.
pub const TE_ERR_PARSE: i32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_of(e: &Error) -> i32 {
    e.exit_code()
}

/// Opaque run configuration.
pub struct TeConfig {
    horizon: Rat,
    step: Rat,
    fit_order: i64,
}

impl Default for TeConfig {
    fn default() -> Self {
        TeConfig {
            horizon: rat(DEFAULT_HORIZON, 1),
            step: rat(1, 16),
            fit_order: 8,
        }
    }
}

/// Create a configuration with the default horizon (24), sampling step
/// (1/16) and fit order (8).
#[no_mangle]
pub extern "C" fn te_config_new() -> *mut TeConfig {
    Box::into_raw(Box::new(TeConfig::default()))
}

/// Release a configuration. Passing NULL is a no-op.
///
/// # Safety
/// `cfg` must be NULL or a pointer returned by [`te_config_new`] that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn te_config_free(cfg: *mut TeConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

unsafe fn config_mut<'a>(cfg: *mut TeConfig) -> Option<&'a mut TeConfig> {
    unsafe { cfg.as_mut() }
}

unsafe fn config_ref(cfg: *const TeConfig) -> TeConfig {
    match unsafe { cfg.as_ref() } {
        Some(c) => TeConfig {
            horizon: c.horizon,
            step: c.step,
            fit_order: c.fit_order,
        },
        None => TeConfig::default(),
    }
}

/// Set the truncation horizon as a rational num/den in q-exponent units.
///
/// # Safety
/// `cfg` must be a live pointer from [`te_config_new`].
#[no_mangle]
pub unsafe extern "C" fn te_config_set_horizon(cfg: *mut TeConfig, num: i64, den: i64) -> i32 {
    let Some(c) = (unsafe { config_mut(cfg) }) else {
        set_error("null config");
        return TE_ERR_INTERNAL;
    };
    if den <= 0 || num <= 0 {
        set_error("horizon must be a positive rational");
        return TE_ERR_PARSE;
    }
    c.horizon = rat(num, den);
    TE_OK
}

/// Set the cycle sampling step 1/den.
///
/// # Safety
/// `cfg` must be a live pointer from [`te_config_new`].
#[no_mangle]
pub unsafe extern "C" fn te_config_set_step(cfg: *mut TeConfig, den: i64) -> i32 {
    let Some(c) = (unsafe { config_mut(cfg) }) else {
        set_error("null config");
        return TE_ERR_INTERNAL;
    };
    if den < 1 {
        set_error("step denominator must be positive");
        return TE_ERR_PARSE;
    }
    c.step = rat(1, den);
    TE_OK
}

/// Set the number of fitted theta-factor coefficients.
///
/// # Safety
/// `cfg` must be a live pointer from [`te_config_new`].
#[no_mangle]
pub unsafe extern "C" fn te_config_set_fit_order(cfg: *mut TeConfig, order: i64) -> i32 {
    let Some(c) = (unsafe { config_mut(cfg) }) else {
        set_error("null config");
        return TE_ERR_INTERNAL;
    };
    if order < 1 {
        set_error("fit order must be positive");
        return TE_ERR_PARSE;
    }
    c.fit_order = order;
    TE_OK
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, i32> {
    if p.is_null() {
        set_error(&format!("null {what}"));
        return Err(TE_ERR_INTERNAL);
    }
    match unsafe { CStr::from_ptr(p) }.to_str() {
        Ok(s) => Ok(s),
        Err(_) => {
            set_error(&format!("{what} is not valid UTF-8"));
            Err(TE_ERR_INTERNAL)
        }
    }
}

fn hand_out(out: *mut *mut c_char, content: String) -> i32 {
    if out.is_null() {
        set_error("null output pointer");
        return TE_ERR_INTERNAL;
    }
    match CString::new(content) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            TE_OK
        }
        Err(_) => {
            set_error("output contained an interior NUL");
            TE_ERR_INTERNAL
        }
    }
}

fn guarded(out: *mut *mut c_char, f: impl FnOnce() -> Result<String, Error>) -> i32 {
    let result = catch_unwind(AssertUnwindSafe(f));
    match result {
        Ok(Ok(content)) => hand_out(out, content),
        Ok(Err(e)) => {
            set_error(&e.to_string());
            code_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            TE_ERR_INTERNAL
        }
    }
}

/// Family coefficients, valuations and delta, as JSON.
///
/// # Safety
/// `r_expr` and `s_expr` must be NUL-terminated strings; `out` must be a
/// valid pointer slot. `cfg` may be NULL for defaults.
#[no_mangle]
pub unsafe extern "C" fn te_family_json(
    cfg: *const TeConfig,
    r_expr: *const c_char,
    s_expr: *const c_char,
    out: *mut *mut c_char,
) -> i32 {
    let c = unsafe { config_ref(cfg) };
    let (r, s) = match (unsafe { read_str(r_expr, "r expression") }, unsafe {
        read_str(s_expr, "s expression")
    }) {
        (Ok(r), Ok(s)) => (r, s),
        (Err(code), _) | (_, Err(code)) => return code,
    };
    guarded(out, || {
        pipeline::family_json(r, s, c.horizon).map(|v| report::to_string_pretty(&v))
    })
}

/// Full classification report, as JSON.
///
/// # Safety
/// As for [`te_family_json`].
#[no_mangle]
pub unsafe extern "C" fn te_classify_json(
    cfg: *const TeConfig,
    r_expr: *const c_char,
    s_expr: *const c_char,
    out: *mut *mut c_char,
) -> i32 {
    let c = unsafe { config_ref(cfg) };
    let (r, s) = match (unsafe { read_str(r_expr, "r expression") }, unsafe {
        read_str(s_expr, "s expression")
    }) {
        (Ok(r), Ok(s)) => (r, s),
        (Err(code), _) | (_, Err(code)) => return code,
    };
    guarded(out, || {
        pipeline::classify_json(r, s, c.horizon).map(|v| report::to_string_pretty(&v))
    })
}

/// Cycle parametrization samples and reconstruction, as JSON.
///
/// # Safety
/// As for [`te_family_json`].
#[no_mangle]
pub unsafe extern "C" fn te_cycle_json(
    cfg: *const TeConfig,
    r_expr: *const c_char,
    s_expr: *const c_char,
    out: *mut *mut c_char,
) -> i32 {
    let c = unsafe { config_ref(cfg) };
    let (r, s) = match (unsafe { read_str(r_expr, "r expression") }, unsafe {
        read_str(s_expr, "s expression")
    }) {
        (Ok(r), Ok(s)) => (r, s),
        (Err(code), _) | (_, Err(code)) => return code,
    };
    guarded(out, || {
        pipeline::cycle_json(r, s, c.horizon, c.step).map(|v| report::to_string_pretty(&v))
    })
}

/// Exact identity suite, as JSON.
///
/// # Safety
/// `out` must be a valid pointer slot; `cfg` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn te_verify_json(cfg: *const TeConfig, out: *mut *mut c_char) -> i32 {
    let c = unsafe { config_ref(cfg) };
    guarded(out, || {
        pipeline::verify_json(c.horizon).map(|v| report::to_string_pretty(&v))
    })
}

/// Bruhat-Tits pipeline report, as JSON.
///
/// # Safety
/// As for [`te_family_json`].
#[no_mangle]
pub unsafe extern "C" fn te_bt_json(
    cfg: *const TeConfig,
    r_expr: *const c_char,
    s_expr: *const c_char,
    out: *mut *mut c_char,
) -> i32 {
    let c = unsafe { config_ref(cfg) };
    let (r, s) = match (unsafe { read_str(r_expr, "r expression") }, unsafe {
        read_str(s_expr, "s expression")
    }) {
        (Ok(r), Ok(s)) => (r, s),
        (Err(code), _) | (_, Err(code)) => return code,
    };
    guarded(out, || {
        pipeline::bt_full(r, s, c.horizon, c.fit_order)
            .map(|o| report::to_string_pretty(&pipeline::bt_json(&o)))
    })
}

/// Render a report JSON (classify, cycle, bt, or {"panels": [...]})
/// into an SVG document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer slot.
#[no_mangle]
pub unsafe extern "C" fn te_render_svg(json: *const c_char, out: *mut *mut c_char) -> i32 {
    let text = match unsafe { read_str(json, "json input") } {
        Ok(t) => t,
        Err(code) => return code,
    };
    guarded(out, || {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            pos: 0,
            msg: format!("invalid JSON: {e}"),
        })?;
        svg::render_json(&v)
    })
}

/// Release a string returned by any command. Passing NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a pointer previously handed out by this library.
#[no_mangle]
pub unsafe extern "C" fn te_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// The last error message on this thread, as a fresh string (release
/// with [`te_string_free`]); NULL when no error has been recorded.
#[no_mangle]
pub extern "C" fn te_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Static library version string; do not free.
#[no_mangle]
pub extern "C" fn te_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn take(out: *mut c_char) -> String {
        assert!(!out.is_null());
        let s = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
        unsafe { te_string_free(out) };
        s
    }

    #[test]
    fn classify_square_case_through_abi() {
        let cfg = te_config_new();
        let r = cstr("1-3q");
        let s = cstr("-1+q");
        let mut out: *mut c_char = std::ptr::null_mut();
        let code = unsafe { te_classify_json(cfg, r.as_ptr(), s.as_ptr(), &mut out) };
        assert_eq!(code, TE_OK);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["measured"]["kind"], serde_json::json!("square"));
        assert_eq!(v["measured"]["length"], serde_json::json!([8, 1]));
        unsafe { te_config_free(cfg) };
    }

    #[test]
    fn verify_and_render_round_trip() {
        let mut out: *mut c_char = std::ptr::null_mut();
        let code = unsafe { te_verify_json(std::ptr::null(), &mut out) };
        assert_eq!(code, TE_OK);
        let verify = take(out);
        assert!(verify.contains("\"all_pass\": true"));

        let cfg = te_config_new();
        let r = cstr("1-3q");
        let s = cstr("-1+q");
        let mut cycle_out: *mut c_char = std::ptr::null_mut();
        let code = unsafe { te_cycle_json(cfg, r.as_ptr(), s.as_ptr(), &mut cycle_out) };
        assert_eq!(code, TE_OK);
        let cycle = take(cycle_out);
        let cycle_c = cstr(&cycle);
        let mut svg_out: *mut c_char = std::ptr::null_mut();
        let code = unsafe { te_render_svg(cycle_c.as_ptr(), &mut svg_out) };
        assert_eq!(code, TE_OK);
        let svg = take(svg_out);
        assert!(svg.starts_with("<svg"));
        unsafe { te_config_free(cfg) };
    }

    #[test]
    fn error_codes_and_messages() {
        let cfg = te_config_new();
        // parse error -> 4
        let r = cstr("1 + x");
        let s = cstr("1");
        let mut out: *mut c_char = std::ptr::null_mut();
        let code = unsafe { te_family_json(cfg, r.as_ptr(), s.as_ptr(), &mut out) };
        assert_eq!(code, TE_ERR_PARSE);
        let msg = take(te_last_error());
        assert!(msg.contains("parse error"), "{msg}");
        // refused input -> 3 (non-smooth curve in the bt pipeline)
        let r = cstr("1+q^2");
        let s = cstr("-1+q^2");
        let code = unsafe { te_bt_json(cfg, r.as_ptr(), s.as_ptr(), &mut out) };
        assert_eq!(code, TE_ERR_REFUSED);
        // precision error -> 2 (horizon too small to resolve u34)
        unsafe { te_config_set_horizon(cfg, 2, 1) };
        let r = cstr("1-3q");
        let s = cstr("-1+q");
        let code = unsafe { te_classify_json(cfg, r.as_ptr(), s.as_ptr(), &mut out) };
        assert_eq!(code, TE_ERR_PRECISION);
        unsafe { te_config_free(cfg) };
    }

    #[test]
    fn config_setters_validate() {
        let cfg = te_config_new();
        assert_eq!(unsafe { te_config_set_horizon(cfg, 0, 1) }, TE_ERR_PARSE);
        assert_eq!(unsafe { te_config_set_horizon(cfg, 49, 2) }, TE_OK);
        assert_eq!(unsafe { te_config_set_step(cfg, 0) }, TE_ERR_PARSE);
        assert_eq!(unsafe { te_config_set_step(cfg, 8) }, TE_OK);
        assert_eq!(unsafe { te_config_set_fit_order(cfg, -1) }, TE_ERR_PARSE);
        assert_eq!(unsafe { te_config_set_fit_order(cfg, 6) }, TE_OK);
        unsafe { te_config_free(cfg) };
        unsafe { te_config_free(std::ptr::null_mut()) };
    }

    #[test]
    fn version_is_static() {
        let v = unsafe { CStr::from_ptr(te_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
