//! C ABI over `gfh-core`.
//!
//! Scenes and engine results are opaque handles created and released by the
//! library. Every fallible call returns a [`GfhStatus`]; on failure the
//! message is available from [`gfh_last_error`] on the same thread until
//! the next call. Strings returned through `char **` belong to the caller
//! and must be released with [`gfh_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gfh_core::report::{self, SceneRun};
use gfh_core::scene::Scene;
use gfh_core::svg::barcode_svg;
use gfh_core::weights::CoefficientField;
use gfh_core::GfhError;

/// Status codes; the values match the exit codes of the `gfh` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfhStatus {
    Ok = 0,
    VerdictFailed = 1,
    InvalidInput = 2,
    TheoremAlarm = 3,
    Io = 4,
    Numerical = 5,
    NullPointer = 6,
    Panic = 7,
}

/// Opaque scene handle.
pub struct GfhScene {
    scene: Scene,
}

/// Opaque handle on one engine run.
pub struct GfhRun {
    run: SceneRun,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GfhStatistics {
    /// Number of finite orbit representatives.
    pub finite: usize,
    pub beta_max: f64,
    pub beta_tot: f64,
    /// Homology count `|q| + 2K`.
    pub homology_count: u64,
    /// 1 if the pairing was resolved uniquely.
    pub exact: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &GfhError) -> GfhStatus {
    match e.code() {
        3 => GfhStatus::TheoremAlarm,
        4 => GfhStatus::Io,
        5 => GfhStatus::Numerical,
        _ => GfhStatus::InvalidInput,
    }
}

enum Fail {
    Lib(GfhError),
    Null(&'static str),
    Verdict,
}

impl From<GfhError> for Fail {
    fn from(e: GfhError) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, recording errors and catching panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GfhStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GfhStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(&format!("{}: {e}", e.reason()));
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            GfhStatus::NullPointer
        }
        Ok(Err(Fail::Verdict)) => {
            set_error("at least one verdict failed");
            GfhStatus::VerdictFailed
        }
        Err(_) => {
            set_error("internal panic");
            GfhStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Lib(GfhError::Scene(format!("{what} is not valid UTF-8"))))
}

unsafe fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail::Lib(GfhError::Structural("interior NUL in output".into())))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(p: *mut T, what: &'static str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail::Null(what))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gfh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gfh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gfh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a TOML scene.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_scene_parse(text: *const c_char, out: *mut *mut GfhScene) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = ptr::null_mut();
        let scene = Scene::parse(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(GfhScene { scene }));
        Ok(())
    })
}

/// Loads a scene file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_scene_load(path: *const c_char, out: *mut *mut GfhScene) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = ptr::null_mut();
        let scene = Scene::load(std::path::Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(GfhScene { scene }));
        Ok(())
    })
}

/// Serializes a scene back to TOML.
///
/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_scene_to_toml(scene: *const GfhScene, out: *mut *mut c_char) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        let s = scene.as_ref().ok_or(Fail::Null("scene"))?;
        out_string(out, s.scene.to_toml()?)
    })
}

/// # Safety
/// `scene` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gfh_scene_free(scene: *mut GfhScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Runs the engine on a scene over `field` (`"q"`, `"f5"`, ...), or over
/// the scene's first field when `field` is null.
///
/// # Safety
/// `scene` must be a live handle; `field` null or NUL-terminated; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_run(scene: *const GfhScene, field: *const c_char, out: *mut *mut GfhRun) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = ptr::null_mut();
        let s = &scene.as_ref().ok_or(Fail::Null("scene"))?.scene;
        let f = if field.is_null() {
            s.fields[0]
        } else {
            CoefficientField::parse(str_arg(field, "field")?)?.checked(&s.weights()?)?
        };
        let run = report::run_scene(s, f)?;
        *out = Box::into_raw(Box::new(GfhRun { run }));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gfh_run_free(run: *mut GfhRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_run_statistics(run: *const GfhRun, out: *mut GfhStatistics) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        let e = &run.as_ref().ok_or(Fail::Null("run"))?.run.output;
        let st = e.barcode.statistics();
        *out = GfhStatistics {
            finite: st.k,
            beta_max: st.beta_max,
            beta_tot: st.beta_tot,
            homology_count: st.n,
            exact: e.resolution.is_exact() as u8,
        };
        Ok(())
    })
}

/// Spectral invariant `c_k` for any integer k; needs an exact resolution.
///
/// # Safety
/// `run` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_run_spectral_invariant(run: *const GfhRun, k: i64, out: *mut f64) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        let e = &run.as_ref().ok_or(Fail::Null("run"))?.run.output;
        *out = e.invariants()?.get(k);
        Ok(())
    })
}

/// Barcode document as JSON.
///
/// # Safety
/// `run` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_run_barcode_json(run: *const GfhRun, out: *mut *mut c_char) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        let r = &run.as_ref().ok_or(Fail::Null("run"))?.run;
        out_string(out, report::to_json(&report::barcode_document(r))?)
    })
}

/// Barcode drawn over actions `[lo, hi]` as SVG.
///
/// # Safety
/// `run` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_run_barcode_svg(run: *const GfhRun, lo: f64, hi: f64, out: *mut *mut c_char) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Fail::Lib(GfhError::OutOfRange { what: "svg range start", value: lo, bound: hi }));
        }
        let r = &run.as_ref().ok_or(Fail::Null("run"))?.run;
        out_string(out, barcode_svg(&r.output.barcode, lo, hi))
    })
}

/// Verdict report as JSON for a comma-separated list of checks (null for
/// the defaults). Returns `VerdictFailed` with the report still written when
/// a check fails.
///
/// # Safety
/// `scene` must be a live handle; `checks` null or NUL-terminated; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_verify(
    scene: *const GfhScene,
    checks: *const c_char,
    seed: u64,
    out: *mut *mut c_char,
) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = ptr::null_mut();
        let s = &scene.as_ref().ok_or(Fail::Null("scene"))?.scene;
        let list = if checks.is_null() {
            report::DEFAULT_CHECKS.iter().map(|c| c.to_string()).collect()
        } else {
            report::parse_checks(str_arg(checks, "checks")?)?
        };
        let rep = report::verify_scene(s, &list, seed)?;
        out_string(out, report::to_json(&rep)?)?;
        if rep.passed() {
            Ok(())
        } else {
            Err(Fail::Verdict)
        }
    })
}

/// Replays a saved barcode (bare or as a document) through the checks that
/// need no scene; a bar of length at least 1 raises `TheoremAlarm`.
///
/// # Safety
/// `json` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfh_verify_barcode(json: *const c_char, out: *mut *mut c_char) -> GfhStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = ptr::null_mut();
        let b = report::parse_barcode(str_arg(json, "json")?)?;
        let rep = report::verify_barcode(&b)?;
        out_string(out, report::to_json(&rep)?)?;
        if rep.passed() {
            Ok(())
        } else {
            Err(Fail::Verdict)
        }
    })
}
