//! C ABI for the offensive-language classifier.
//!
//! The surface is a classic opaque-handle design: load a model file into an
//! [`OfflangModel`], predict labels for UTF-8 tweet text, free the handle.
//! Every fallible call returns an [`OfflangStatus`] code; the most recent
//! failure message for the calling thread is available via
//! [`offlang_last_error`]. The matching C header is generated into
//! `include/offlang.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use offlang::pipeline::Predictor;

/// Result codes for all fallible FFI calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfflangStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The model file could not be read or parsed.
    LoadFailed = 3,
    /// Prediction failed (see `offlang_last_error`).
    PredictFailed = 4,
    /// The caller-provided buffer is too small.
    BufferTooSmall = 5,
    /// This model family does not define class probabilities.
    NoProbabilities = 6,
    /// The class index is out of range.
    IndexOutOfRange = 7,
}

/// Opaque classifier handle; create with [`offlang_model_load`], destroy with
/// [`offlang_model_free`].
pub struct OfflangModel {
    predictor: Predictor,
    class_names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").expect("empty cstring"));
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("nul bytes stripped");
    });
}

/// Message describing the most recent failure on the calling thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn offlang_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn offlang_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, OfflangStatus> {
    if ptr.is_null() {
        return Err(OfflangStatus::NullArgument);
    }
    // SAFETY: caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8");
        OfflangStatus::InvalidUtf8
    })
}

/// Load a model file written by `offlang train`.
///
/// On success writes a handle to `out_model` and returns `Ok`; the caller
/// owns the handle and must release it with [`offlang_model_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_model` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offlang_model_load(
    path: *const c_char,
    out_model: *mut *mut OfflangModel,
) -> OfflangStatus {
    if out_model.is_null() {
        return OfflangStatus::NullArgument;
    }
    let path = match unsafe { utf8_arg(path) } {
        Ok(p) => PathBuf::from(p),
        Err(status) => return status,
    };
    match Predictor::load(&path) {
        Ok(predictor) => {
            let class_names = predictor
                .labels
                .iter()
                .map(|l| CString::new(l.as_str()).expect("labels contain no NUL"))
                .collect();
            let handle = Box::new(OfflangModel {
                predictor,
                class_names,
            });
            unsafe { *out_model = Box::into_raw(handle) };
            OfflangStatus::Ok
        }
        Err(e) => {
            set_last_error(&e.to_string());
            unsafe { *out_model = ptr::null_mut() };
            OfflangStatus::LoadFailed
        }
    }
}

/// Release a handle returned by [`offlang_model_load`]. A null pointer is a
/// no-op.
///
/// # Safety
/// `model` must be a pointer previously returned by [`offlang_model_load`]
/// that has not yet been freed.
#[no_mangle]
pub unsafe extern "C" fn offlang_model_free(model: *mut OfflangModel) {
    if !model.is_null() {
        // SAFETY: ownership transfers back; caller promises single free.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of classes the model distinguishes.
///
/// # Safety
/// `model` must be a live handle from [`offlang_model_load`].
#[no_mangle]
pub unsafe extern "C" fn offlang_model_num_classes(model: *const OfflangModel) -> usize {
    if model.is_null() {
        return 0;
    }
    unsafe { &*model }.class_names.len()
}

/// Name of class `index` (NUL-terminated, owned by the handle, valid until
/// the handle is freed). Returns null when `index` is out of range.
///
/// # Safety
/// `model` must be a live handle from [`offlang_model_load`].
#[no_mangle]
pub unsafe extern "C" fn offlang_model_class_name(
    model: *const OfflangModel,
    index: usize,
) -> *const c_char {
    if model.is_null() {
        return ptr::null();
    }
    let model = unsafe { &*model };
    model
        .class_names
        .get(index)
        .map_or(ptr::null(), |name| name.as_ptr())
}

/// Classify one tweet. The predicted label is written NUL-terminated into
/// `out_label` (`label_capacity` bytes; 8 is always enough for the built-in
/// tasks).
///
/// # Safety
/// `model` must be a live handle, `text` a NUL-terminated string, and
/// `out_label` writable for `label_capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn offlang_predict(
    model: *const OfflangModel,
    text: *const c_char,
    out_label: *mut c_char,
    label_capacity: usize,
) -> OfflangStatus {
    if model.is_null() || out_label.is_null() {
        return OfflangStatus::NullArgument;
    }
    let text = match unsafe { utf8_arg(text) } {
        Ok(t) => t,
        Err(status) => return status,
    };
    let model = unsafe { &*model };
    match model.predictor.predict_text(text) {
        Ok(label) => {
            let bytes = label.as_bytes();
            if bytes.len() + 1 > label_capacity {
                set_last_error("label buffer too small");
                return OfflangStatus::BufferTooSmall;
            }
            // SAFETY: capacity checked above; label contains no NUL.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, out_label, bytes.len());
                *out_label.add(bytes.len()) = 0;
            }
            OfflangStatus::Ok
        }
        Err(e) => {
            set_last_error(&e.to_string());
            OfflangStatus::PredictFailed
        }
    }
}

/// Classify one tweet and also write per-class probabilities (indexed like
/// [`offlang_model_class_name`]) into `out_probs`. Fails with
/// `NoProbabilities` for model families without a probability reading
/// (the hinge-loss classifier).
///
/// # Safety
/// As [`offlang_predict`]; additionally `out_probs` must be writable for
/// `probs_capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn offlang_predict_proba(
    model: *const OfflangModel,
    text: *const c_char,
    out_label: *mut c_char,
    label_capacity: usize,
    out_probs: *mut f64,
    probs_capacity: usize,
) -> OfflangStatus {
    if model.is_null() || out_label.is_null() || out_probs.is_null() {
        return OfflangStatus::NullArgument;
    }
    let text = match unsafe { utf8_arg(text) } {
        Ok(t) => t,
        Err(status) => return status,
    };
    let model_ref = unsafe { &*model };
    let (label, probs) = match model_ref.predictor.predict_with_probabilities(text) {
        Ok(pair) => pair,
        Err(e) => {
            set_last_error(&e.to_string());
            return OfflangStatus::PredictFailed;
        }
    };
    let Some(probs) = probs else {
        set_last_error("model family does not define probabilities");
        return OfflangStatus::NoProbabilities;
    };
    if probs.len() > probs_capacity {
        set_last_error("probability buffer too small");
        return OfflangStatus::BufferTooSmall;
    }
    let bytes = label.as_bytes();
    if bytes.len() + 1 > label_capacity {
        set_last_error("label buffer too small");
        return OfflangStatus::BufferTooSmall;
    }
    // SAFETY: capacities checked above.
    unsafe {
        ptr::copy_nonoverlapping(probs.as_ptr(), out_probs, probs.len());
        ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, out_label, bytes.len());
        *out_label.add(bytes.len()) = 0;
    }
    OfflangStatus::Ok
}
