//! C ABI over the `skewspec` core.
//!
//! Models and windows are opaque heap handles released with the matching
//! `_free` function. Every fallible call returns a [`SkewspecStatus`]; on
//! failure the message is available from [`skewspec_last_error`] on the same
//! thread until the next failing call. Panics are caught at the boundary and
//! reported as [`SkewspecStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use skewspec::density::delta_density_with;
use skewspec::dynamics::{Frequency, PotentialForm, SamplingFunction, TorusPoint};
use skewspec::eigensolve::{eigenvalues_all, nearest_eigenvalue, sturm_count, Spectrum};
use skewspec::error::Error;
use skewspec::greens::greens_entry;
use skewspec::operator::{build_restriction, ModelParams, WindowOperator};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewspecStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Numeric = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewspecForm {
    /// `V(n) = f(y + n x + n (n-1) alpha)`.
    Skew = 0,
    /// `V(n) = f(y + alpha n^2)`.
    Square = 1,
}

/// Opaque model handle.
pub struct SkewspecModel(ModelParams);

/// Opaque handle for a finite restriction together with its spectrum.
pub struct SkewspecWindow {
    op: WindowOperator,
    spectrum: Spectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SkewspecStatus, msg: impl Into<String>) -> SkewspecStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> SkewspecStatus {
    let status = match e {
        Error::Validation(_) | Error::WindowMismatch { .. } => SkewspecStatus::Validation,
        _ => SkewspecStatus::Numeric,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> SkewspecStatus) -> SkewspecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SkewspecStatus::Panic, format!("panic: {msg}"))
        }
    }
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return fail(SkewspecStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

macro_rules! out {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => return fail(SkewspecStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

fn put_model(out: *mut *mut SkewspecModel, m: ModelParams) -> SkewspecStatus {
    let slot = out!(out);
    *slot = Box::into_raw(Box::new(SkewspecModel(m)));
    SkewspecStatus::Ok
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn skewspec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn skewspec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `amplitude * cos(2 pi t)` sampled along the skew-shift orbit of `(x, y)`
/// with `alpha = sqrt 2`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn skewspec_model_cosine_skew(
    amplitude: f64,
    h: f64,
    x: f64,
    y: f64,
    out: *mut *mut SkewspecModel,
) -> SkewspecStatus {
    guard(|| {
        if !amplitude.is_finite() || !x.is_finite() || !y.is_finite() {
            return fail(SkewspecStatus::Validation, "amplitude and phase must be finite");
        }
        match ModelParams::cosine_skew(amplitude, h) {
            Ok(m) => put_model(out, m.with_phase(x, y)),
            Err(e) => from_error(e),
        }
    })
}

/// The density-table model `2 cos(2 pi sqrt(2) n^2)` with `h = 1`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn skewspec_model_sqrt2(out: *mut *mut SkewspecModel) -> SkewspecStatus {
    guard(|| put_model(out, ModelParams::square_root_two_model()))
}

/// Model from a sampling-function JSON document; `alpha` must lie in `[0, 1)`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skewspec_model_from_json(
    json: *const c_char,
    alpha: f64,
    h: f64,
    form: SkewspecForm,
    x: f64,
    y: f64,
    out: *mut *mut SkewspecModel,
) -> SkewspecStatus {
    guard(|| {
        if json.is_null() {
            return fail(SkewspecStatus::NullPointer, "json is null");
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(s) => s,
            Err(_) => return fail(SkewspecStatus::Validation, "json is not UTF-8"),
        };
        let form = match form {
            SkewspecForm::Skew => PotentialForm::Skew,
            SkewspecForm::Square => PotentialForm::Square,
        };
        let built = SamplingFunction::from_json_str(text).and_then(|f| {
            ModelParams::new(f, Frequency::new(alpha)?, h, TorusPoint::new(x, y), form)
        });
        match built {
            Ok(m) => put_model(out, m),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skewspec_model_free(model: *mut SkewspecModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// `V(n)` for the model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skewspec_model_potential(
    model: *const SkewspecModel,
    n: i64,
    out: *mut f64,
) -> SkewspecStatus {
    guard(|| {
        let m = deref!(model);
        *out!(out) = m.0.potential(n);
        SkewspecStatus::Ok
    })
}

/// Restriction of the model to `[a, b]`; its spectrum is computed once here.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skewspec_window_new(
    model: *const SkewspecModel,
    a: i64,
    b: i64,
    out: *mut *mut SkewspecWindow,
) -> SkewspecStatus {
    guard(|| {
        let m = deref!(model);
        let slot = out!(out);
        match build_restriction(&m.0, a, b) {
            Ok(op) => {
                let spectrum = eigenvalues_all(&op, 0.0);
                *slot = Box::into_raw(Box::new(SkewspecWindow { op, spectrum }));
                SkewspecStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `window` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skewspec_window_free(window: *mut SkewspecWindow) {
    if !window.is_null() {
        drop(unsafe { Box::from_raw(window) });
    }
}

/// Number of sites, or 0 for a null handle.
///
/// # Safety
/// `window` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skewspec_window_len(window: *const SkewspecWindow) -> usize {
    unsafe { window.as_ref() }.map_or(0, |w| w.op.len())
}

/// Number of eigenvalues strictly below `e`.
///
/// # Safety
/// `window` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skewspec_window_sturm_count(
    window: *const SkewspecWindow,
    e: f64,
    out: *mut usize,
) -> SkewspecStatus {
    guard(|| {
        let w = deref!(window);
        if e.is_nan() {
            return fail(SkewspecStatus::Validation, "energy is NaN");
        }
        *out!(out) = sturm_count(&w.op, e);
        SkewspecStatus::Ok
    })
}

/// Copies the ascending eigenvalues into `buf`. `len_out` always receives the
/// window length; a short buffer gives `BufferTooSmall` and writes nothing.
///
/// # Safety
/// `buf` must point to `cap` writable doubles (or be null when `cap == 0`).
#[no_mangle]
pub unsafe extern "C" fn skewspec_window_eigenvalues(
    window: *const SkewspecWindow,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> SkewspecStatus {
    guard(|| {
        let w = deref!(window);
        let ev = &w.spectrum.eigenvalues;
        *out!(len_out) = ev.len();
        if cap < ev.len() {
            return fail(
                SkewspecStatus::BufferTooSmall,
                format!("buffer holds {cap} values, need {}", ev.len()),
            );
        }
        if buf.is_null() {
            return fail(SkewspecStatus::NullPointer, "buf is null");
        }
        unsafe { std::slice::from_raw_parts_mut(buf, ev.len()) }.copy_from_slice(ev);
        SkewspecStatus::Ok
    })
}

/// Eigenvalue nearest `e0` and its 0-based index in ascending order.
///
/// # Safety
/// `window` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn skewspec_window_nearest_eigenvalue(
    window: *const SkewspecWindow,
    e0: f64,
    lambda_out: *mut f64,
    index_out: *mut usize,
) -> SkewspecStatus {
    guard(|| {
        let w = deref!(window);
        if !e0.is_finite() {
            return fail(SkewspecStatus::Validation, "energy must be finite");
        }
        let (lambda, index) = nearest_eigenvalue(&w.op, e0);
        *out!(lambda_out) = lambda;
        *out!(index_out) = index;
        SkewspecStatus::Ok
    })
}

/// Minimal width of `count` consecutive eigenvalues (6 for the density test).
///
/// # Safety
/// `window` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skewspec_window_delta(
    window: *const SkewspecWindow,
    count: usize,
    out: *mut f64,
) -> SkewspecStatus {
    guard(|| {
        let w = deref!(window);
        match delta_density_with(&w.spectrum, count) {
            Ok(d) => {
                *out!(out) = d;
                SkewspecStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Green's function entry `G(e)(k, l)` for absolute sites `k`, `l`.
///
/// # Safety
/// `window` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skewspec_window_greens_entry(
    window: *const SkewspecWindow,
    e: f64,
    k: i64,
    l: i64,
    out: *mut f64,
) -> SkewspecStatus {
    guard(|| {
        let w = deref!(window);
        match greens_entry(&w.op, e, k, l) {
            Ok(g) => {
                *out!(out) = g;
                SkewspecStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
