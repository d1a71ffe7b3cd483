//! C ABI over `hyperloc`. Objects cross the boundary as opaque handles;
//! every function returns an [`HlStatus`] and records a message readable
//! through [`hl_last_error_message`] on failure. Strings returned to C are
//! released with [`hl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperloc::fourier::{fourier_transform, orthant_partition, ContourConfig};
use hyperloc::hyperfunction::{boundary_evaluate, BoundaryOptions, Hyperfunction};
use hyperloc::localization::{picken, LocalizationProblem};
use hyperloc::loop_su2::{fixed_loop_from_modes, verify_fixed_loop};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    NumericalFailure = 4,
    Panic = 5,
}

/// Localization problem handle.
pub struct HlProblem(LocalizationProblem);

/// Hyperfunction handle.
pub struct HlHyperfunction(Hyperfunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(HlStatus, String);

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure(HlStatus::InvalidInput, e.to_string())
    }

    fn numerical(e: impl std::fmt::Display) -> Self {
        Failure(HlStatus::NumericalFailure, e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HlStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(HlStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(HlStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(Failure::input)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Built-in `S²` problem with polarization `ξ = −1`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hl_problem_s2(out: *mut *mut HlProblem) -> HlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(HlProblem(LocalizationProblem::builtin_s2())));
        Ok(())
    })
}

/// Problem parsed from JSON `{rank, polarization, fixed_points}`.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_problem_from_json(json: *const c_char, out: *mut *mut HlProblem) -> HlStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = read_str(json, "json")?;
        let v: serde_json::Value = serde_json::from_str(text).map_err(Failure::input)?;
        let p = LocalizationProblem::from_json(&v).map_err(Failure::input)?;
        *out = Box::into_raw(Box::new(HlProblem(p)));
        Ok(())
    })
}

/// # Safety
/// `problem` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hl_problem_free(problem: *mut HlProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Picken hyperfunction of `problem`.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_picken(problem: *const HlProblem, out: *mut *mut HlHyperfunction) -> HlStatus {
    guard(|| {
        non_null(problem, "problem")?;
        non_null(out, "out")?;
        let l = picken(&(*problem).0).map_err(Failure::input)?;
        *out = Box::into_raw(Box::new(HlHyperfunction(l)));
        Ok(())
    })
}

/// Fourier transform over the orthant partition of unity, with default
/// contour settings.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_fourier_transform_orthant(f: *const HlHyperfunction, out: *mut *mut HlHyperfunction) -> HlStatus {
    guard(|| {
        non_null(f, "f")?;
        non_null(out, "out")?;
        let h = &(*f).0;
        let r = fourier_transform(h, &orthant_partition(h.dim()), &ContourConfig::default()).map_err(Failure::numerical)?;
        *out = Box::into_raw(Box::new(HlHyperfunction(r.hyperfunction)));
        Ok(())
    })
}

/// Dimension of the ambient space.
///
/// # Safety
/// `f` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn hl_hyperfunction_dim(f: *const HlHyperfunction) -> usize {
    if f.is_null() {
        0
    } else {
        (*f).0.dim()
    }
}

/// Boundary value at `x` (length `dim`) extrapolated from `ε = 2^{-k}`,
/// `k = eps_first..=eps_last`, over `levels` Richardson levels.
///
/// # Safety
/// `x` must point to `len` doubles; `re`, `im`, `err` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_hyperfunction_boundary_evaluate(
    f: *const HlHyperfunction,
    x: *const f64,
    len: usize,
    eps_first: i32,
    eps_last: i32,
    levels: usize,
    re: *mut f64,
    im: *mut f64,
    err: *mut f64,
) -> HlStatus {
    guard(|| {
        non_null(f, "f")?;
        non_null(x, "x")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        non_null(err, "err")?;
        let point = std::slice::from_raw_parts(x, len);
        let opts = BoundaryOptions::halving(eps_first, eps_last, levels);
        let bv = boundary_evaluate(&(*f).0, point, &opts).map_err(Failure::numerical)?;
        *re = bv.value.re;
        *im = bv.value.im;
        *err = bv.error;
        Ok(())
    })
}

/// JSON serialization of `f`; release with [`hl_string_free`].
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_hyperfunction_to_json(f: *const HlHyperfunction, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        non_null(f, "f")?;
        non_null(out, "out")?;
        let v = (*f).0.to_json().map_err(Failure::input)?;
        *out = into_c_string(v.to_string())?;
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hl_hyperfunction_free(f: *mut HlHyperfunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Fixed loop of the circle `(n, m)` with modes `k, k2`, orbit angles
/// `phi, psi`, verified on `samples` points; JSON with coefficients and
/// residuals. Release with [`hl_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_su2_fixed_loop_json(
    n: i64,
    m: i64,
    k: i64,
    k2: i64,
    phi: f64,
    psi: f64,
    samples: usize,
    out: *mut *mut c_char,
) -> HlStatus {
    guard(|| {
        non_null(out, "out")?;
        if samples == 0 {
            return Err(Failure::input("samples must be positive"));
        }
        let l = fixed_loop_from_modes(n, m, k, k2, phi, psi).map_err(Failure::input)?;
        let rep = verify_fixed_loop(&l, samples);
        let v = hyperloc::cli::fixed_loop_json(&l, &rep);
        *out = into_c_string(v.to_string())?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
