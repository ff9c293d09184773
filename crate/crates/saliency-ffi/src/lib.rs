//! C ABI over the saliency toolkit.
//!
//! Conventions: objects cross the boundary as opaque handles, every
//! fallible call returns a `SalStatus`, and the last error message is
//! kept in thread-local storage for retrieval with
//! `sal_last_error_message`. The header is generated by cbindgen at
//! build time (see `include/saliency.h`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use saliency::core::{
    gaussian_blob, minmax_normalize, pixels_per_degree, SaliencyMap, ViewingGeometry,
};
use saliency::error::Error;
use saliency::metrics::{auc, nss};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SalStatus {
    SalOk = 0,
    /// A required pointer argument was null.
    SalNullArgument = 1,
    /// Invalid argument or geometry.
    SalInvalidArgument = 2,
    /// Input was valid but degenerate (empty sets, constant map).
    SalDegenerate = 3,
    /// Internal error; see `sal_last_error_message`.
    SalInternal = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "?")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SalStatus {
    match err {
        Error::DegenerateInput(_) => SalStatus::SalDegenerate,
        Error::InvalidGeometry(_)
        | Error::InvalidParameter { .. }
        | Error::DimensionMismatch(_)
        | Error::OutOfBounds { .. }
        | Error::Config(_) => SalStatus::SalInvalidArgument,
        _ => SalStatus::SalInternal,
    }
}

fn fail(err: Error) -> SalStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

/// Opaque saliency map handle.
pub struct SalMap {
    inner: SaliencyMap,
}

/// Copy the last error message on this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length in
/// bytes, or 0 if no error is recorded.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn sal_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let borrow = e.borrow();
        let Some(msg) = borrow.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // guarantee termination after truncation
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sal_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Pixels per degree of visual angle for a viewing setup.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sal_pixels_per_degree(
    screen_w_px: u32,
    screen_h_px: u32,
    screen_diagonal_in: f64,
    viewing_distance_cm: f64,
    display_w_px: u32,
    display_h_px: u32,
    out: *mut f64,
) -> SalStatus {
    if out.is_null() {
        return SalStatus::SalNullArgument;
    }
    let geom = ViewingGeometry {
        screen_w_px,
        screen_h_px,
        screen_diagonal_in,
        viewing_distance_cm,
        display_w_px,
        display_h_px,
    };
    match pixels_per_degree(&geom) {
        Ok(p) => {
            *out = p;
            SalStatus::SalOk
        }
        Err(e) => fail(e),
    }
}

/// Create a map from `width * height` row-major nonnegative values.
/// Returns null on error (query `sal_last_error_message`).
///
/// # Safety
/// `values` must point to `width * height` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn sal_map_new(
    width: usize,
    height: usize,
    values: *const f64,
) -> *mut SalMap {
    if values.is_null() {
        set_error("values pointer is null");
        return ptr::null_mut();
    }
    let data = std::slice::from_raw_parts(values, width * height).to_vec();
    match SaliencyMap::new(width, height, data) {
        Ok(inner) => Box::into_raw(Box::new(SalMap { inner })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Gaussian blob map: unit peak at the pixel nearest the center,
/// truncated at four sigma. Returns null on error.
#[no_mangle]
pub extern "C" fn sal_map_gaussian(
    width: usize,
    height: usize,
    center_x: f64,
    center_y: f64,
    sigma: f64,
) -> *mut SalMap {
    match gaussian_blob(width, height, (center_x, center_y), sigma) {
        Ok(inner) => Box::into_raw(Box::new(SalMap { inner })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Free a map handle; null is a no-op.
///
/// # Safety
/// `map` must be a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn sal_map_free(map: *mut SalMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sal_map_width(map: *const SalMap) -> usize {
    map.as_ref().map_or(0, |m| m.inner.width())
}

/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sal_map_height(map: *const SalMap) -> usize {
    map.as_ref().map_or(0, |m| m.inner.height())
}

/// Read one pixel.
///
/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sal_map_get(
    map: *const SalMap,
    x: usize,
    y: usize,
    out: *mut f64,
) -> SalStatus {
    let (Some(m), false) = (map.as_ref(), out.is_null()) else {
        return SalStatus::SalNullArgument;
    };
    if x >= m.inner.width() || y >= m.inner.height() {
        set_error("pixel index out of range");
        return SalStatus::SalInvalidArgument;
    }
    *out = m.inner.get(x, y);
    SalStatus::SalOk
}

/// Replace a map with its min-max normalization to [0, 1].
///
/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sal_map_normalize(map: *mut SalMap) -> SalStatus {
    let Some(m) = map.as_mut() else {
        return SalStatus::SalNullArgument;
    };
    m.inner = minmax_normalize(&m.inner);
    SalStatus::SalOk
}

/// Rank-based AUC between two sample arrays, ties counted half.
///
/// # Safety
/// `positives`/`negatives` must point to `n_pos`/`n_neg` doubles; `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn sal_auc(
    positives: *const f64,
    n_pos: usize,
    negatives: *const f64,
    n_neg: usize,
    out: *mut f64,
) -> SalStatus {
    if positives.is_null() || negatives.is_null() || out.is_null() {
        return SalStatus::SalNullArgument;
    }
    let p = std::slice::from_raw_parts(positives, n_pos);
    let n = std::slice::from_raw_parts(negatives, n_neg);
    match auc(p, n) {
        Ok(v) => {
            *out = v;
            SalStatus::SalOk
        }
        Err(e) => fail(e),
    }
}

/// Normalized scanpath saliency of a map at interleaved x,y gaze
/// coordinates, with the local-maximum radius in map pixels.
///
/// # Safety
/// `gaze_xy` must point to `2 * n_points` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sal_nss(
    map: *const SalMap,
    gaze_xy: *const f64,
    n_points: usize,
    radius_px: f64,
    out: *mut f64,
) -> SalStatus {
    let (Some(m), false, false) = (map.as_ref(), gaze_xy.is_null(), out.is_null()) else {
        return SalStatus::SalNullArgument;
    };
    let flat = std::slice::from_raw_parts(gaze_xy, 2 * n_points);
    let gaze: Vec<(f64, f64)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    match nss(&m.inner, &gaze, radius_px) {
        Ok(v) => {
            *out = v;
            SalStatus::SalOk
        }
        Err(e) => fail(e),
    }
}

/// Fit the center-bias Gaussian to a gaze manifest and write the model
/// file, mirroring the CLI `fit-bias` command.
///
/// # Safety
/// `manifest_path` and `out_path` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn sal_fit_center_bias(
    manifest_path: *const c_char,
    out_path: *const c_char,
) -> SalStatus {
    if manifest_path.is_null() || out_path.is_null() {
        return SalStatus::SalNullArgument;
    }
    let (Ok(manifest), Ok(out)) = (
        CStr::from_ptr(manifest_path).to_str(),
        CStr::from_ptr(out_path).to_str(),
    ) else {
        set_error("paths must be valid UTF-8");
        return SalStatus::SalInvalidArgument;
    };
    match fit_bias_impl(Path::new(manifest), Path::new(out)) {
        Ok(()) => SalStatus::SalOk,
        Err(e) => fail(e),
    }
}

fn fit_bias_impl(manifest: &Path, out: &Path) -> Result<(), Error> {
    let bundles = saliency::ingest::load_bundles(manifest, saliency::ingest::ParseMode::Strict)?;
    let mut normalized = Vec::new();
    for b in &bundles {
        let (w, h) = (
            b.geometry.display_w_px as f64,
            b.geometry.display_h_px as f64,
        );
        for p in b.gaze.points() {
            normalized.push((p.x / w, p.y / h));
        }
    }
    let model = saliency::centerbias::fit_center_bias(&normalized)?;
    model.save(out)
}
