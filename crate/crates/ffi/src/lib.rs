//! C ABI over the `walklab` library.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns a [`WlStatus`];
//! on failure a message is available from [`wl_last_error`] on the same
//! thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use walklab::experiments::grammar::{parse_group_spec, parse_measure_source, parse_word};
use walklab::measures::{FiniteMeasure, Rational, DEFAULT_SUPPORT_CAP};
use walklab::walk::{entropy_ladder, rigorous_escape};
use walklab::{Error, GroupSpec};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    SupportCap = 5,
    Precondition = 6,
    ToleranceUnreachable = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// A parsed group.
pub struct WlGroup {
    spec: GroupSpec,
}

enum Weights {
    Exact(FiniteMeasure<Rational>),
    Float(FiniteMeasure<f64>),
}

/// A finitely supported probability measure, exact or floating point.
pub struct WlMeasure {
    inner: Weights,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WlStatus {
    match e {
        Error::Parse(_) | Error::InvalidSpec(_) => WlStatus::Parse,
        Error::SupportCap { .. } | Error::ClosureCap { .. } => WlStatus::SupportCap,
        Error::Precondition(_) | Error::SpecMismatch { .. } => WlStatus::Precondition,
        Error::ToleranceUnreachable { .. } => WlStatus::ToleranceUnreachable,
        Error::GridPoint { source, .. } => status_of(source),
        _ => WlStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (WlStatus, String)>>(f: F) -> WlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WlStatus::Internal
        }
    }
}

fn lib(e: Error) -> (WlStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn cstr<'a>(p: *const c_char) -> Result<&'a str, (WlStatus, String)> {
    if p.is_null() {
        return Err((WlStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (WlStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, (WlStatus, String)> {
    p.as_ref().ok_or((WlStatus::NullPointer, "null handle".into()))
}

fn out_ptr<T>(p: *mut T) -> Result<(), (WlStatus, String)> {
    if p.is_null() {
        Err((WlStatus::NullPointer, "null output pointer".into()))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call on this thread.
#[no_mangle]
pub extern "C" fn wl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a group such as `Z^2`, `Dinf` or `wreath(C2, Dinf)`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wl_group_parse(text: *const c_char, out: *mut *mut WlGroup) -> WlStatus {
    guard(|| {
        out_ptr(out)?;
        let spec = parse_group_spec(cstr(text)?).map_err(lib)?;
        *out = Box::into_raw(Box::new(WlGroup { spec }));
        Ok(())
    })
}

/// # Safety
/// `group` must come from [`wl_group_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wl_group_free(group: *mut WlGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Parses a measure literal (`measure { atom "g" w; … }`) or a family
/// reference on `group`. `exact != 0` selects rational weights.
///
/// # Safety
/// `group` must be a live handle, `text` a valid string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wl_measure_parse(
    group: *const WlGroup,
    text: *const c_char,
    exact: c_int,
    out: *mut *mut WlMeasure,
) -> WlStatus {
    guard(|| {
        out_ptr(out)?;
        let spec = &deref(group)?.spec;
        let t = cstr(text)?;
        let inner = if exact != 0 {
            Weights::Exact(parse_measure_source(Some(spec), t).map_err(lib)?)
        } else {
            Weights::Float(parse_measure_source(Some(spec), t).map_err(lib)?)
        };
        *out = Box::into_raw(Box::new(WlMeasure { inner }));
        Ok(())
    })
}

/// # Safety
/// `measure` must come from [`wl_measure_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn wl_measure_free(measure: *mut WlMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Number of atoms.
///
/// # Safety
/// `measure` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wl_measure_len(measure: *const WlMeasure, out: *mut usize) -> WlStatus {
    guard(|| {
        out_ptr(out)?;
        *out = match &deref(measure)?.inner {
            Weights::Exact(m) => m.len(),
            Weights::Float(m) => m.len(),
        };
        Ok(())
    })
}

/// Shannon entropy in nats.
///
/// # Safety
/// `measure` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wl_measure_entropy(measure: *const WlMeasure, out: *mut f64) -> WlStatus {
    guard(|| {
        out_ptr(out)?;
        *out = match &deref(measure)?.inner {
            Weights::Exact(m) => m.entropy_f64(),
            Weights::Float(m) => m.entropy_f64(),
        };
        Ok(())
    })
}

/// Writes `H(μ^{*n})` for `n = 0..=n_max` into `out[0..=n_max]`; `out_len`
/// must be at least `n_max + 1`. `cap == 0` uses the default support cap.
/// `invariants_hold` (optional) receives whether the ladder invariants hold.
///
/// # Safety
/// `measure` must be live and `out` must point to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wl_entropy_ladder(
    measure: *const WlMeasure,
    n_max: usize,
    cap: usize,
    out: *mut f64,
    out_len: usize,
    invariants_hold: *mut c_int,
) -> WlStatus {
    guard(|| {
        out_ptr(out)?;
        if out_len < n_max.saturating_add(1) {
            return Err((WlStatus::BufferTooSmall, format!("need {} slots, got {out_len}", n_max + 1)));
        }
        let cap = if cap == 0 { DEFAULT_SUPPORT_CAP } else { cap };
        let (values, ok) = match &deref(measure)?.inner {
            Weights::Exact(m) => {
                let l = entropy_ladder(m, n_max, cap).map_err(lib)?;
                let ok = l.check_invariants().map_err(lib)?.all_hold();
                ((0..=n_max).map(|n| l.h_f64(n)).collect::<Vec<_>>(), ok)
            }
            Weights::Float(m) => {
                let l = entropy_ladder(m, n_max, cap).map_err(lib)?;
                let ok = l.check_invariants().map_err(lib)?.all_hold();
                ((0..=n_max).map(|n| l.h_f64(n)).collect::<Vec<_>>(), ok)
            }
        };
        std::slice::from_raw_parts_mut(out, values.len()).copy_from_slice(&values);
        if !invariants_hold.is_null() {
            *invariants_hold = c_int::from(ok);
        }
        Ok(())
    })
}

/// Rigorous escape-probability interval `[lo, hi]` with width at most `tol`.
/// Supports walks on `Z`, `Z^2`, and translation-supported walks on `Dinf`
/// and `BS(1,-1)`.
///
/// # Safety
/// `measure` must be live; `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn wl_exact_escape(
    measure: *const WlMeasure,
    tol: f64,
    max_terms: usize,
    lo: *mut f64,
    hi: *mut f64,
) -> WlStatus {
    guard(|| {
        out_ptr(lo)?;
        out_ptr(hi)?;
        if !(tol > 0.0) {
            return Err((WlStatus::InvalidArgument, "tol must be positive".into()));
        }
        let est = match &deref(measure)?.inner {
            Weights::Exact(m) => rigorous_escape(m, tol, max_terms),
            Weights::Float(m) => rigorous_escape(m, tol, max_terms),
        }
        .map_err(lib)?;
        *lo = est.lo;
        *hi = est.hi;
        Ok(())
    })
}

/// Whether `word` (e.g. `"[x1,x2]"`) is trivial in the free solvable group
/// `S(d, m)`; writes 1 or 0 to `out`.
///
/// # Safety
/// `word` must be a valid string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wl_magnus_is_identity(word: *const c_char, d: usize, m: usize, out: *mut c_int) -> WlStatus {
    guard(|| {
        out_ptr(out)?;
        let w = parse_word(cstr(word)?).map_err(lib)?;
        *out = c_int::from(walklab::magnus::is_identity_in_sdm(&w, d, m).map_err(lib)?);
        Ok(())
    })
}
