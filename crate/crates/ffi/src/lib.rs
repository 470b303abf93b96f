//! C ABI over the tileinspect library.
//!
//! Conventions: every fallible function returns a [`TiStatus`] and writes
//! results through out-pointers, which are touched only on
//! `TI_STATUS_OK`. Handles ([`TiImage`], [`TiPyramid`]) are opaque and
//! owned by the caller; release them with the matching `_free` function.
//! Byte buffers returned through out-pointers are released with
//! [`ti_buffer_free`]. After any non-OK status,
//! [`ti_last_error_message`] returns a description; the pointer is valid
//! on the calling thread until the next call into this library.

use std::cell::RefCell;
use std::ffi::{c_char, CString};

use tileinspect::imageio;
use tileinspect::inspect::{self, InspectConfig};
use tileinspect::wavelet::{self, Image, Pyramid};

/// Result of a C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiStatus {
    /// The call succeeded and out-pointers are filled in.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A scalar argument was out of its documented range.
    InvalidArgument = 2,
    /// Encoded bytes could not be decoded or validated.
    FormatError = 3,
    /// A transform or comparison rejected the data (shape, levels).
    TransformError = 4,
    /// A caller-provided buffer is too small.
    BufferTooSmall = 5,
}

/// Inspection verdict.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiVerdict {
    Ok = 0,
    Defective = 1,
}

/// Opaque grayscale image handle (row-major f64 samples).
pub struct TiImage {
    inner: Image,
}

/// Opaque multilevel decomposition handle.
pub struct TiPyramid {
    inner: Pyramid,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl std::fmt::Display) {
    let text = message.to_string();
    let cstring = CString::new(text)
        .unwrap_or_else(|_| CString::new("error message contained a NUL byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = cstring);
}

fn fail(status: TiStatus, message: impl std::fmt::Display) -> TiStatus {
    set_error(message);
    status
}

/// Returns the crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ti_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the message for the most recent failure on this thread. The
/// pointer stays valid until the next call into this library from the
/// same thread.
#[no_mangle]
pub extern "C" fn ti_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates an image from `rows * cols` row-major samples.
///
/// # Safety
/// `data` must point to at least `rows * cols` readable f64 values and
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ti_image_new(
    rows: u32,
    cols: u32,
    data: *const f64,
    out: *mut *mut TiImage,
) -> TiStatus {
    if data.is_null() || out.is_null() {
        return fail(TiStatus::NullArgument, "data and out must be non-null");
    }
    if rows == 0 || cols == 0 {
        return fail(
            TiStatus::InvalidArgument,
            "image dimensions must be nonzero",
        );
    }
    let count = rows as usize * cols as usize;
    let samples = std::slice::from_raw_parts(data, count).to_vec();
    let image = Image::from_vec(rows as usize, cols as usize, samples);
    *out = Box::into_raw(Box::new(TiImage { inner: image }));
    TiStatus::Ok
}

/// Decodes a PGM buffer (P2 or P5) into a new image handle.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ti_image_from_pgm(
    bytes: *const u8,
    len: usize,
    out: *mut *mut TiImage,
) -> TiStatus {
    if bytes.is_null() || out.is_null() {
        return fail(TiStatus::NullArgument, "bytes and out must be non-null");
    }
    let buffer = std::slice::from_raw_parts(bytes, len);
    match imageio::load_pgm(buffer) {
        Ok(image) => {
            *out = Box::into_raw(Box::new(TiImage { inner: image }));
            TiStatus::Ok
        }
        Err(e) => fail(TiStatus::FormatError, e),
    }
}

/// Encodes an image as PGM (binary `P5` when `binary`, plain `P2`
/// otherwise). The buffer written to `out_bytes`/`out_len` is released
/// with [`ti_buffer_free`].
///
/// # Safety
/// All pointers must be valid; `image` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ti_image_to_pgm(
    image: *const TiImage,
    binary: bool,
    out_bytes: *mut *mut u8,
    out_len: *mut usize,
) -> TiStatus {
    if image.is_null() || out_bytes.is_null() || out_len.is_null() {
        return fail(
            TiStatus::NullArgument,
            "image, out_bytes, out_len must be non-null",
        );
    }
    let encoded = imageio::save_pgm(&(*image).inner, binary);
    let boxed = encoded.into_boxed_slice();
    *out_len = boxed.len();
    *out_bytes = Box::into_raw(boxed) as *mut u8;
    TiStatus::Ok
}

/// Reports an image's dimensions.
///
/// # Safety
/// All pointers must be valid; `image` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ti_image_dims(
    image: *const TiImage,
    rows: *mut u32,
    cols: *mut u32,
) -> TiStatus {
    if image.is_null() || rows.is_null() || cols.is_null() {
        return fail(TiStatus::NullArgument, "image, rows, cols must be non-null");
    }
    *rows = (*image).inner.rows() as u32;
    *cols = (*image).inner.cols() as u32;
    TiStatus::Ok
}

/// Copies an image's row-major samples into `out`, which holds `capacity`
/// f64 slots; fails with `TI_STATUS_BUFFER_TOO_SMALL` if `capacity` is
/// less than rows * cols.
///
/// # Safety
/// `out` must point to at least `capacity` writable f64 values.
#[no_mangle]
pub unsafe extern "C" fn ti_image_copy_data(
    image: *const TiImage,
    out: *mut f64,
    capacity: usize,
) -> TiStatus {
    if image.is_null() || out.is_null() {
        return fail(TiStatus::NullArgument, "image and out must be non-null");
    }
    let data = (*image).inner.data();
    if capacity < data.len() {
        return fail(
            TiStatus::BufferTooSmall,
            format_args!("need {} slots, have {capacity}", data.len()),
        );
    }
    std::ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
    TiStatus::Ok
}

/// Releases an image handle. Null is a no-op.
///
/// # Safety
/// `image` must be a pointer previously returned by this library and not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn ti_image_free(image: *mut TiImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Decomposes an image into a `levels`-deep pyramid. With `pad`, images
/// whose dimensions are not divisible by 2^levels are padded by edge
/// replication first. `levels` must be in 1..=24.
///
/// # Safety
/// `image` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ti_decompose(
    image: *const TiImage,
    levels: u32,
    pad: bool,
    out: *mut *mut TiPyramid,
) -> TiStatus {
    if image.is_null() || out.is_null() {
        return fail(TiStatus::NullArgument, "image and out must be non-null");
    }
    if !(1..=24).contains(&levels) {
        return fail(TiStatus::InvalidArgument, "levels must be in 1..=24");
    }
    let source = &(*image).inner;
    let result = if pad {
        wavelet::decompose_padded(source, levels as usize)
    } else {
        wavelet::decompose(source, levels as usize)
    };
    match result {
        Ok(pyramid) => {
            *out = Box::into_raw(Box::new(TiPyramid { inner: pyramid }));
            TiStatus::Ok
        }
        Err(e) => fail(TiStatus::TransformError, e),
    }
}

/// Reports a pyramid's level count and pre-padding source dimensions.
///
/// # Safety
/// All pointers must be valid; `pyramid` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ti_pyramid_info(
    pyramid: *const TiPyramid,
    levels: *mut u32,
    source_rows: *mut u32,
    source_cols: *mut u32,
) -> TiStatus {
    if pyramid.is_null() || levels.is_null() || source_rows.is_null() || source_cols.is_null() {
        return fail(TiStatus::NullArgument, "all arguments must be non-null");
    }
    let p = &(*pyramid).inner;
    *levels = p.levels as u32;
    *source_rows = p.source_rows as u32;
    *source_cols = p.source_cols as u32;
    TiStatus::Ok
}

/// Copies a pyramid's approximation matrix into a new image handle.
///
/// # Safety
/// `pyramid` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ti_pyramid_approximation(
    pyramid: *const TiPyramid,
    out: *mut *mut TiImage,
) -> TiStatus {
    if pyramid.is_null() || out.is_null() {
        return fail(TiStatus::NullArgument, "pyramid and out must be non-null");
    }
    let approximation = (*pyramid).inner.approximation.clone();
    *out = Box::into_raw(Box::new(TiImage {
        inner: approximation,
    }));
    TiStatus::Ok
}

/// Rebuilds the source image from a pyramid (cropping any padding).
///
/// # Safety
/// `pyramid` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ti_reconstruct(
    pyramid: *const TiPyramid,
    out: *mut *mut TiImage,
) -> TiStatus {
    if pyramid.is_null() || out.is_null() {
        return fail(TiStatus::NullArgument, "pyramid and out must be non-null");
    }
    match wavelet::reconstruct(&(*pyramid).inner) {
        Ok(image) => {
            *out = Box::into_raw(Box::new(TiImage { inner: image }));
            TiStatus::Ok
        }
        Err(e) => fail(TiStatus::TransformError, e),
    }
}

/// Serializes a pyramid to its binary file format. Release the buffer
/// with [`ti_buffer_free`].
///
/// # Safety
/// All pointers must be valid; `pyramid` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ti_pyramid_to_bytes(
    pyramid: *const TiPyramid,
    out_bytes: *mut *mut u8,
    out_len: *mut usize,
) -> TiStatus {
    if pyramid.is_null() || out_bytes.is_null() || out_len.is_null() {
        return fail(
            TiStatus::NullArgument,
            "pyramid, out_bytes, out_len must be non-null",
        );
    }
    let encoded = imageio::save_pyramid(&(*pyramid).inner);
    let boxed = encoded.into_boxed_slice();
    *out_len = boxed.len();
    *out_bytes = Box::into_raw(boxed) as *mut u8;
    TiStatus::Ok
}

/// Deserializes a pyramid from its binary file format.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ti_pyramid_from_bytes(
    bytes: *const u8,
    len: usize,
    out: *mut *mut TiPyramid,
) -> TiStatus {
    if bytes.is_null() || out.is_null() {
        return fail(TiStatus::NullArgument, "bytes and out must be non-null");
    }
    let buffer = std::slice::from_raw_parts(bytes, len);
    match imageio::load_pyramid(buffer) {
        Ok(pyramid) => {
            *out = Box::into_raw(Box::new(TiPyramid { inner: pyramid }));
            TiStatus::Ok
        }
        Err(e) => fail(TiStatus::FormatError, e),
    }
}

/// Releases a pyramid handle. Null is a no-op.
///
/// # Safety
/// `pyramid` must be a pointer previously returned by this library and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ti_pyramid_free(pyramid: *mut TiPyramid) {
    if !pyramid.is_null() {
        drop(Box::from_raw(pyramid));
    }
}

/// Euclidean distance between two equally shaped images (typically two
/// approximation matrices).
///
/// # Safety
/// `a` and `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ti_euclidean_distance(
    a: *const TiImage,
    b: *const TiImage,
    out: *mut f64,
) -> TiStatus {
    if a.is_null() || b.is_null() || out.is_null() {
        return fail(TiStatus::NullArgument, "a, b, out must be non-null");
    }
    match inspect::euclidean_distance(&(*a).inner, &(*b).inner) {
        Ok(distance) => {
            *out = distance;
            TiStatus::Ok
        }
        Err(e) => fail(TiStatus::TransformError, e),
    }
}

/// Full inspection of `test` against `reference`: decompose both to
/// `levels`, compare approximations, classify against `threshold`.
/// `threshold` must be finite and nonnegative.
///
/// # Safety
/// `reference` and `test` must be live handles; out-pointers must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn ti_inspect(
    reference: *const TiImage,
    test: *const TiImage,
    levels: u32,
    threshold: f64,
    pad: bool,
    out_distance: *mut f64,
    out_verdict: *mut TiVerdict,
) -> TiStatus {
    if reference.is_null() || test.is_null() || out_distance.is_null() || out_verdict.is_null() {
        return fail(
            TiStatus::NullArgument,
            "reference, test, out_distance, out_verdict must be non-null",
        );
    }
    if !(1..=24).contains(&levels) {
        return fail(TiStatus::InvalidArgument, "levels must be in 1..=24");
    }
    if !threshold.is_finite() || threshold < 0.0 {
        return fail(
            TiStatus::InvalidArgument,
            "threshold must be finite and nonnegative",
        );
    }
    let config = InspectConfig {
        levels: levels as usize,
        distance_threshold: threshold,
        map_coeff_threshold: None,
        pad_enabled: pad,
    };
    match inspect::inspect_pair(&(*reference).inner, &(*test).inner, &config) {
        Ok(result) => {
            *out_distance = result.distance;
            *out_verdict = match result.verdict {
                inspect::Verdict::Ok => TiVerdict::Ok,
                inspect::Verdict::Defective => TiVerdict::Defective,
            };
            TiStatus::Ok
        }
        Err(e) => fail(TiStatus::TransformError, e),
    }
}

/// Builds the full-resolution defect map for a reference/test pair:
/// samples are 1.0 where the approximation moved more than
/// `coeff_threshold`, else 0.0, at the source resolution.
///
/// # Safety
/// `reference` and `test` must be live handles and `out_map` valid.
#[no_mangle]
pub unsafe extern "C" fn ti_defect_map(
    reference: *const TiImage,
    test: *const TiImage,
    levels: u32,
    coeff_threshold: f64,
    pad: bool,
    out_map: *mut *mut TiImage,
) -> TiStatus {
    if reference.is_null() || test.is_null() || out_map.is_null() {
        return fail(
            TiStatus::NullArgument,
            "reference, test, out_map must be non-null",
        );
    }
    if !(1..=24).contains(&levels) {
        return fail(TiStatus::InvalidArgument, "levels must be in 1..=24");
    }
    if !coeff_threshold.is_finite() || coeff_threshold < 0.0 {
        return fail(
            TiStatus::InvalidArgument,
            "coeff_threshold must be finite and nonnegative",
        );
    }
    let config = InspectConfig {
        levels: levels as usize,
        distance_threshold: 0.0,
        map_coeff_threshold: Some(coeff_threshold),
        pad_enabled: pad,
    };
    match inspect::inspect_pair(&(*reference).inner, &(*test).inner, &config) {
        Ok(result) => {
            let map = result
                .defect_map_fullres
                .expect("map requested through config");
            *out_map = Box::into_raw(Box::new(TiImage { inner: map }));
            TiStatus::Ok
        }
        Err(e) => fail(TiStatus::TransformError, e),
    }
}

/// Releases a byte buffer returned by this library. Null is a no-op;
/// `len` must be the length the library reported for it.
///
/// # Safety
/// `bytes` must be a buffer pointer previously returned by this library
/// with length `len`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ti_buffer_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(
            bytes, len,
        )));
    }
}
