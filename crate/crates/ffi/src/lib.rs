//! C ABI over `kset-core`.
//!
//! Every function returns a [`KsetStatus`]. On failure a message is stored
//! per thread and can be read with [`kset_last_error`]. Decimal results are
//! written as NUL-terminated strings into caller buffers; when the buffer is
//! too small the call returns `KSET_STATUS_BUFFER_TOO_SMALL` and reports the
//! required size (including the NUL) through `needed`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kset_core::limit::{fix_probability_from_survival, survival_with_stats};
use kset_core::{
    evaluate, exceptions, finite_fix_probability, Error, ExpPoly, HighPrecisionDecimal,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Invariant = 4,
    Io = 5,
    Panic = 6,
}

/// Which of the two complementary probabilities to format.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsetQuantity {
    /// Probability that some `k`-set is fixed.
    Fix = 0,
    /// Probability that no `k`-set is fixed.
    Survival = 1,
}

/// Exact limiting survival probability for one `k`. Opaque to C.
pub struct KsetLimit {
    poly: ExpPoly,
    rows: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(status: KsetStatus, msg: impl Into<String>) -> KsetStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> KsetStatus {
    let status = match e {
        Error::InvalidArgument(_) => KsetStatus::InvalidArgument,
        Error::Invariant(_) => KsetStatus::Invariant,
        Error::Io(_) => KsetStatus::Io,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> KsetStatus) -> KsetStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(KsetStatus::Panic, msg)
        }
    }
}

fn check_digits(digits: u32) -> Result<(), KsetStatus> {
    if (1..=kset_core::cli::MAX_DIGITS).contains(&digits) {
        Ok(())
    } else {
        Err(fail(
            KsetStatus::InvalidArgument,
            format!("digits must be in 1..=50, got {digits}"),
        ))
    }
}

/// # Safety
/// `buf` must be valid for `len` bytes or null with `len == 0`; `needed` may be null.
unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> KsetStatus {
    let want = s.len() + 1;
    if !needed.is_null() {
        *needed = want;
    }
    if buf.is_null() || len < want {
        return fail(
            KsetStatus::BufferTooSmall,
            format!("buffer needs {want} bytes"),
        );
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    KsetStatus::Ok
}

/// Last error message on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn kset_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kset_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Computes the limiting probability for `k` and stores a new handle in `*out`.
///
/// # Safety
/// `out` must be a valid pointer. Release the handle with [`kset_limit_free`].
#[no_mangle]
pub unsafe extern "C" fn kset_limit_new(k: u32, out: *mut *mut KsetLimit) -> KsetStatus {
    guard(|| {
        if out.is_null() {
            return fail(KsetStatus::NullPointer, "out is null");
        }
        match survival_with_stats(k, true) {
            Ok((poly, stats)) => {
                *out = Box::into_raw(Box::new(KsetLimit {
                    poly,
                    rows: stats.rows_emitted,
                }));
                KsetStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `h` must come from [`kset_limit_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kset_limit_free(h: *mut KsetLimit) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of table rows that contributed.
///
/// # Safety
/// `h` must be a live handle and `rows` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kset_limit_rows(h: *const KsetLimit, rows: *mut u64) -> KsetStatus {
    if h.is_null() || rows.is_null() {
        return fail(KsetStatus::NullPointer, "null argument");
    }
    *rows = (*h).rows;
    KsetStatus::Ok
}

/// Formats the chosen probability with `digits` correct decimal places.
///
/// # Safety
/// `h` must be a live handle; see [`write_str`] for the buffer contract.
#[no_mangle]
pub unsafe extern "C" fn kset_limit_format(
    h: *const KsetLimit,
    quantity: KsetQuantity,
    digits: u32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> KsetStatus {
    guard(|| {
        if h.is_null() {
            return fail(KsetStatus::NullPointer, "handle is null");
        }
        if let Err(s) = check_digits(digits) {
            return s;
        }
        let poly = &(*h).poly;
        let d = match quantity {
            KsetQuantity::Fix => fix_probability_from_survival(poly, digits),
            KsetQuantity::Survival => evaluate(poly, digits),
        };
        write_str(d.as_str(), buf, len, needed)
    })
}

/// Exact finite-degree probability `i(n,k)` (or its complement), rounded.
///
/// # Safety
/// See [`write_str`] for the buffer contract.
#[no_mangle]
pub unsafe extern "C" fn kset_finite_format(
    n: u32,
    k: u32,
    quantity: KsetQuantity,
    digits: u32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> KsetStatus {
    guard(|| {
        if let Err(s) = check_digits(digits) {
            return s;
        }
        match finite_fix_probability(n, k) {
            Ok(r) => {
                let x = match quantity {
                    KsetQuantity::Fix => r.fix_probability,
                    KsetQuantity::Survival => r.survival,
                };
                write_str(
                    HighPrecisionDecimal::from_rational(&x, digits).as_str(),
                    buf,
                    len,
                    needed,
                )
            }
            Err(e) => from_error(e),
        }
    })
}

/// Writes the exception pairs for degrees up to `n_max` as `n, k` pairs into
/// `pairs` (room for `capacity` pairs, i.e. `2 * capacity` integers).
/// `*count` receives the number of pairs found even when the buffer is short.
///
/// # Safety
/// `pairs` must be valid for `2 * capacity` writes (or null with capacity 0);
/// `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kset_exceptions(
    n_max: u32,
    pairs: *mut u32,
    capacity: usize,
    count: *mut usize,
) -> KsetStatus {
    guard(|| {
        if count.is_null() {
            return fail(KsetStatus::NullPointer, "count is null");
        }
        let found = match exceptions(n_max, true) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        *count = found.len();
        if found.len() > capacity || (pairs.is_null() && !found.is_empty()) {
            return fail(
                KsetStatus::BufferTooSmall,
                format!("need room for {} pairs", found.len()),
            );
        }
        for (i, (n, k)) in found.into_iter().enumerate() {
            *pairs.add(2 * i) = n;
            *pairs.add(2 * i + 1) = k;
        }
        KsetStatus::Ok
    })
}

/// Monte-Carlo estimate of the limiting survival probability.
///
/// # Safety
/// `estimate` and `std_error` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn kset_mc_limit_survival(
    k: u32,
    samples: u64,
    seed: u64,
    estimate: *mut f64,
    std_error: *mut f64,
) -> KsetStatus {
    guard(|| {
        if estimate.is_null() || std_error.is_null() {
            return fail(KsetStatus::NullPointer, "null argument");
        }
        match kset_core::sample_limit_survival(k, samples, seed) {
            Ok(e) => {
                *estimate = e.estimate;
                *std_error = e.std_error;
                KsetStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
