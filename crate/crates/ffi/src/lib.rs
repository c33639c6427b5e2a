//! C ABI over the tsadbench engine.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every function returns a [`TsadStatus`]; on
//! failure, [`tsad_last_error`] describes the error for the calling thread.
//! Strings returned through out-pointers are freed with [`tsad_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tsadbench::detectors::{build_with_window, Detector, DetectorSpec, FittedDetector};
use tsadbench::metrics::{auc_pr, auc_roc, evaluate_all, vus, Curve, EvalConfig, VusParams};
use tsadbench::types::{Matrix, Overlap, ScoreSeries};
use tsadbench::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsadStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad argument, hyperparameter or JSON spec.
    InvalidArgument = 3,
    /// Data the operation cannot handle (too short, degenerate, one class).
    DataError = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsadCurve {
    Roc = 0,
    Pr = 1,
}

/// Unfitted detector.
pub struct TsadDetector(Box<dyn Detector>);

/// Fitted detector; scoring does not mutate it.
pub struct TsadFitted(Box<dyn FittedDetector>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Fail(TsadStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_)
            | Error::UnknownKind(_)
            | Error::InvalidHyperparam { .. }
            | Error::Json(_) => TsadStatus::InvalidArgument,
            _ => TsadStatus::DataError,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TsadStatus::NullPointer, format!("`{what}` is null"))
}

/// Run `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TsadStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TsadStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TsadStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn matrix(data: *const f64, rows: usize, cols: usize) -> Result<Matrix, Fail> {
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Fail(TsadStatus::InvalidArgument, "rows * cols overflows".into()))?;
    Ok(Matrix::new(rows, cols, slice(data, len, "data")?.to_vec())?)
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread ("" after a success).
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tsad_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tsad_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a detector from a JSON spec such as
/// `{"kind": "lof", "params": {"k": 10}, "seed": 1}`. `window` is the
/// fallback window for specs without one; 0 means none.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsad_detector_new(
    spec_json: *const c_char,
    window: usize,
    out: *mut *mut TsadDetector,
) -> TsadStatus {
    guard(|| {
        if spec_json.is_null() {
            return Err(null("spec_json"));
        }
        let text = CStr::from_ptr(spec_json)
            .to_str()
            .map_err(|e| Fail(TsadStatus::InvalidUtf8, e.to_string()))?;
        let spec: DetectorSpec = serde_json::from_str(text).map_err(Error::from)?;
        let detector = build_with_window(&spec, (window > 0).then_some(window))?;
        write_out(out, Box::into_raw(Box::new(TsadDetector(detector))), "out")
    })
}

/// # Safety
/// `detector` must come from [`tsad_detector_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tsad_detector_free(detector: *mut TsadDetector) {
    if !detector.is_null() {
        drop(Box::from_raw(detector));
    }
}

/// Fewest training rows the detector accepts.
///
/// # Safety
/// `detector` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsad_detector_min_train_rows(
    detector: *const TsadDetector,
    out: *mut usize,
) -> TsadStatus {
    guard(|| {
        let d = detector.as_ref().ok_or_else(|| null("detector"))?;
        write_out(out, d.0.min_train_rows(), "out")
    })
}

/// Fit on a row-major `rows x cols` matrix. `data` may be null when
/// `rows == 0` (fit-free kinds).
///
/// # Safety
/// `detector` must be a live handle; `data` must hold `rows * cols` values;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsad_detector_fit(
    detector: *const TsadDetector,
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut TsadFitted,
) -> TsadStatus {
    guard(|| {
        let d = detector.as_ref().ok_or_else(|| null("detector"))?;
        let fitted = d.0.fit(&matrix(data, rows, cols)?)?;
        write_out(out, Box::into_raw(Box::new(TsadFitted(fitted))), "out")
    })
}

/// # Safety
/// `fitted` must come from [`tsad_detector_fit`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tsad_fitted_free(fitted: *mut TsadFitted) {
    if !fitted.is_null() {
        drop(Box::from_raw(fitted));
    }
}

/// Score a row-major `rows x cols` matrix into `scores` (`rows` values).
///
/// # Safety
/// `fitted` must be a live handle; `data` must hold `rows * cols` values and
/// `scores` room for `rows`.
#[no_mangle]
pub unsafe extern "C" fn tsad_fitted_score(
    fitted: *const TsadFitted,
    data: *const f64,
    rows: usize,
    cols: usize,
    overlapping: bool,
    scores: *mut f64,
) -> TsadStatus {
    guard(|| {
        let f = fitted.as_ref().ok_or_else(|| null("fitted"))?;
        let overlap = if overlapping { Overlap::Overlapping } else { Overlap::NonOverlapping };
        let s = f.0.score(&matrix(data, rows, cols)?, overlap)?;
        if rows > 0 && scores.is_null() {
            return Err(null("scores"));
        }
        ptr::copy_nonoverlapping(s.scores().as_ptr(), scores, rows);
        Ok(())
    })
}

unsafe fn score_inputs<'a>(
    scores: *const f64,
    labels: *const u8,
    len: usize,
) -> Result<(&'a [f64], &'a [u8]), Fail> {
    Ok((slice(scores, len, "scores")?, slice(labels, len, "labels")?))
}

/// AUC of `scores` against binary `labels`.
///
/// # Safety
/// `scores` and `labels` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsad_auc(
    scores: *const f64,
    labels: *const u8,
    len: usize,
    curve: TsadCurve,
    out: *mut f64,
) -> TsadStatus {
    guard(|| {
        let (s, l) = score_inputs(scores, labels, len)?;
        let v = match curve {
            TsadCurve::Roc => auc_roc(s, l)?,
            TsadCurve::Pr => auc_pr(s, l)?,
        };
        write_out(out, v, "out")
    })
}

/// Volume under the range-AUC surface for buffers up to `l_max` points.
///
/// # Safety
/// `scores` and `labels` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsad_vus(
    scores: *const f64,
    labels: *const u8,
    len: usize,
    l_max: f64,
    curve: TsadCurve,
    out: *mut f64,
) -> TsadStatus {
    guard(|| {
        let (s, l) = score_inputs(scores, labels, len)?;
        let c = match curve {
            TsadCurve::Roc => Curve::Roc,
            TsadCurve::Pr => Curve::Pr,
        };
        write_out(out, vus(s, l, &VusParams::new(l_max), c)?, "out")
    })
}

/// Every metric, as a JSON object
/// `{"entries": {...}, "threshold_used": t, "best_thresholds": {...}}`.
/// Free the string with [`tsad_string_free`].
///
/// # Safety
/// `scores` and `labels` must hold `len` values; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsad_evaluate_json(
    scores: *const f64,
    labels: *const u8,
    len: usize,
    buffer: f64,
    out_json: *mut *mut c_char,
) -> TsadStatus {
    guard(|| {
        let (s, l) = score_inputs(scores, labels, len)?;
        let series = ScoreSeries::new(s.to_vec(), 0)?;
        let eval = evaluate_all(&series, l, &EvalConfig::new(buffer))?;
        let text = serde_json::to_string(&eval.report).map_err(Error::from)?;
        let c = CString::new(text).map_err(|e| Fail(TsadStatus::Panic, e.to_string()))?;
        write_out(out_json, c.into_raw(), "out_json")
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tsad_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
