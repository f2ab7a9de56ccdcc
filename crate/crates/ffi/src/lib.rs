//! C ABI over the one-shot coding library.
//!
//! Conventions: every function returns an [`OnebitStatus`]; results land in
//! out-pointers. Handles are opaque and freed with their matching `_free`
//! function. `onebit_last_error_message` returns a thread-local description
//! of the most recent failure, valid until the next failing call on the
//! same thread. No function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use onebit::channels::{make_hashing_channel, make_prevedel, Channel, Renormalize};
use onebit::correlations::{
    chsh_values, device_e, is_nonsignaling, local_fraction, pr_box, tsirelson_box, BinaryBox,
    Correlation, Sign,
};
use onebit::error::Error;
use onebit::radius::SolverOptions;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitStatus {
    Ok = 0,
    /// A pointer argument was null or an argument was out of range.
    InvalidArgument = 1,
    /// Input text failed to parse.
    ParseError = 2,
    /// A domain object failed validation.
    ValidationError = 3,
    /// An enumeration or iteration budget was exceeded.
    BudgetExceeded = 4,
    /// An iterative solver failed to converge.
    SolverFailure = 5,
    /// A certificate re-check failed.
    CertificateMismatch = 6,
    /// A panic was caught at the boundary.
    Internal = 7,
}

/// Opaque channel handle.
pub struct OnebitChannel {
    inner: Channel,
}

/// Opaque correlation handle.
pub struct OnebitCorrelation {
    inner: Correlation,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(e: &Error) -> OnebitStatus {
    match e {
        Error::Parse(_) | Error::Json(_) => OnebitStatus::ParseError,
        Error::BudgetExceeded(_) => OnebitStatus::BudgetExceeded,
        Error::SolverFailure(_) => OnebitStatus::SolverFailure,
        Error::CertificateMismatch(_) | Error::InfeasibleCertificate(_) => {
            OnebitStatus::CertificateMismatch
        }
        _ => OnebitStatus::ValidationError,
    }
}

fn fail(e: &Error) -> OnebitStatus {
    set_error(&e.to_string());
    status_for(e)
}

fn guarded<F: FnOnce() -> OnebitStatus>(f: F) -> OnebitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            OnebitStatus::Internal
        }
    }
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn onebit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn read_utf8<'a>(ptr: *const c_char) -> Result<&'a str, OnebitStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(OnebitStatus::InvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        OnebitStatus::InvalidArgument
    })
}

fn put_channel(out: *mut *mut OnebitChannel, ch: Channel) -> OnebitStatus {
    if out.is_null() {
        set_error("null output pointer");
        return OnebitStatus::InvalidArgument;
    }
    unsafe {
        *out = Box::into_raw(Box::new(OnebitChannel { inner: ch }));
    }
    OnebitStatus::Ok
}

fn put_correlation(out: *mut *mut OnebitCorrelation, c: Correlation) -> OnebitStatus {
    if out.is_null() {
        set_error("null output pointer");
        return OnebitStatus::InvalidArgument;
    }
    unsafe {
        *out = Box::into_raw(Box::new(OnebitCorrelation { inner: c }));
    }
    OnebitStatus::Ok
}

unsafe fn channel_ref<'a>(ptr: *const OnebitChannel) -> Result<&'a Channel, OnebitStatus> {
    if ptr.is_null() {
        set_error("null channel handle");
        return Err(OnebitStatus::InvalidArgument);
    }
    Ok(&(*ptr).inner)
}

unsafe fn correlation_ref<'a>(
    ptr: *const OnebitCorrelation,
) -> Result<&'a Correlation, OnebitStatus> {
    if ptr.is_null() {
        set_error("null correlation handle");
        return Err(OnebitStatus::InvalidArgument);
    }
    Ok(&(*ptr).inner)
}

fn write_f64(out: *mut f64, v: f64) -> OnebitStatus {
    if out.is_null() {
        set_error("null output pointer");
        return OnebitStatus::InvalidArgument;
    }
    unsafe {
        *out = v;
    }
    OnebitStatus::Ok
}

/// Parses a channel from its JSON document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. The returned handle must be released with
/// [`onebit_channel_free`].
#[no_mangle]
pub unsafe extern "C" fn onebit_channel_from_json(
    json: *const c_char,
    out: *mut *mut OnebitChannel,
) -> OnebitStatus {
    guarded(|| {
        let text = match read_utf8(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Channel::from_json_str(text, Renormalize::No) {
            Ok(ch) => put_channel(out, ch),
            Err(e) => fail(&e),
        }
    })
}

/// Builds the 4x6 benchmark channel.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_channel_prevedel(out: *mut *mut OnebitChannel) -> OnebitStatus {
    guarded(|| put_channel(out, make_prevedel()))
}

/// Builds the hashing channel on `m`-bit inputs (1 <= m <= 8).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_channel_hashing(
    m: u32,
    out: *mut *mut OnebitChannel,
) -> OnebitStatus {
    guarded(|| match make_hashing_channel(m) {
        Ok(ch) => put_channel(out, ch),
        Err(e) => fail(&e),
    })
}

/// Serializes a channel back to JSON. Free the result with
/// [`onebit_string_free`].
///
/// # Safety
/// `ch` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_channel_to_json(
    ch: *const OnebitChannel,
    out: *mut *mut c_char,
) -> OnebitStatus {
    guarded(|| {
        let channel = match channel_ref(ch) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out.is_null() {
            set_error("null output pointer");
            return OnebitStatus::InvalidArgument;
        }
        match channel.to_json_string() {
            Ok(text) => match CString::new(text) {
                Ok(cs) => {
                    *out = cs.into_raw();
                    OnebitStatus::Ok
                }
                Err(_) => {
                    set_error("serialized text contained an interior NUL");
                    OnebitStatus::Internal
                }
            },
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `ch` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn onebit_channel_free(ch: *mut OnebitChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// # Safety
/// `s` must originate from [`onebit_channel_to_json`] or a sibling.
#[no_mangle]
pub unsafe extern "C" fn onebit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a correlation from its JSON document. `clamped`, when non-null,
/// receives the count of slightly-negative entries clamped to zero.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn onebit_correlation_from_json(
    json: *const c_char,
    out: *mut *mut OnebitCorrelation,
    clamped: *mut usize,
) -> OnebitStatus {
    guarded(|| {
        let text = match read_utf8(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Correlation::from_json_str(text) {
            Ok((c, n)) => {
                if !clamped.is_null() {
                    *clamped = n;
                }
                put_correlation(out, c)
            }
            Err(e) => fail(&e),
        }
    })
}

/// Builds a Popescu-Rohrlich box (`j` in 1..=4; `positive` selects the sign).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_correlation_pr_box(
    j: usize,
    positive: bool,
    out: *mut *mut OnebitCorrelation,
) -> OnebitStatus {
    guarded(|| {
        let sign = if positive { Sign::Plus } else { Sign::Minus };
        match pr_box(j, sign) {
            Ok(b) => put_correlation(out, b.into_correlation()),
            Err(e) => fail(&e),
        }
    })
}

/// Builds the CHSH-optimal quantum box.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_correlation_tsirelson(
    out: *mut *mut OnebitCorrelation,
) -> OnebitStatus {
    guarded(|| put_correlation(out, tsirelson_box().into_correlation()))
}

/// Builds the parity-query device matched to the hashing channel.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_correlation_device_e(
    m: u32,
    out: *mut *mut OnebitCorrelation,
) -> OnebitStatus {
    guarded(|| match device_e(m) {
        Ok(c) => put_correlation(out, c),
        Err(e) => fail(&e),
    })
}

/// Serializes a correlation back to JSON. Free with [`onebit_string_free`].
///
/// # Safety
/// `corr` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_correlation_to_json(
    corr: *const OnebitCorrelation,
    out: *mut *mut c_char,
) -> OnebitStatus {
    guarded(|| {
        let c = match correlation_ref(corr) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if out.is_null() {
            set_error("null output pointer");
            return OnebitStatus::InvalidArgument;
        }
        match c.to_json_string() {
            Ok(text) => match CString::new(text) {
                Ok(cs) => {
                    *out = cs.into_raw();
                    OnebitStatus::Ok
                }
                Err(_) => {
                    set_error("serialized text contained an interior NUL");
                    OnebitStatus::Internal
                }
            },
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `corr` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn onebit_correlation_free(corr: *mut OnebitCorrelation) {
    if !corr.is_null() {
        drop(Box::from_raw(corr));
    }
}

/// Unassisted one-shot success probability.
///
/// # Safety
/// `ch` must be a live handle; `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_succ(ch: *const OnebitChannel, value: *mut f64) -> OnebitStatus {
    guarded(|| {
        let channel = match channel_ref(ch) {
            Ok(c) => c,
            Err(s) => return s,
        };
        write_f64(value, onebit::channels::succ_unassisted(channel))
    })
}

/// Non-signaling assisted success probability.
///
/// # Safety
/// `ch` must be a live handle; `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_succ_ns(
    ch: *const OnebitChannel,
    value: *mut f64,
) -> OnebitStatus {
    guarded(|| {
        let channel = match channel_ref(ch) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match onebit::assist::succ_ns(channel) {
            Ok(r) => write_f64(value, r.value),
            Err(e) => fail(&e),
        }
    })
}

/// Two-dimensional entanglement-assisted success probability. `restarts`
/// is the per-assignment restart count (0 selects the default of 64).
///
/// # Safety
/// `ch` must be a live handle; `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_succ_q2(
    ch: *const OnebitChannel,
    seed: u64,
    restarts: u32,
    value: *mut f64,
) -> OnebitStatus {
    guarded(|| {
        let channel = match channel_ref(ch) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let opts = SolverOptions {
            seed,
            restarts: if restarts == 0 { 64 } else { restarts },
            ..SolverOptions::default()
        };
        match onebit::assist::succ_qn(channel, 2, &opts) {
            Ok(r) => write_f64(value, r.value),
            Err(e) => fail(&e),
        }
    })
}

/// Whether the correlation satisfies both non-signaling marginals.
///
/// # Safety
/// `corr` must be a live handle; `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_is_nonsignaling(
    corr: *const OnebitCorrelation,
    result: *mut bool,
) -> OnebitStatus {
    guarded(|| {
        let c = match correlation_ref(corr) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if result.is_null() {
            set_error("null output pointer");
            return OnebitStatus::InvalidArgument;
        }
        *result = is_nonsignaling(c);
        OnebitStatus::Ok
    })
}

/// The four CHSH functional values of a binary box.
///
/// # Safety
/// `corr` must be a live binary-box handle; `values` must point to at
/// least 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn onebit_chsh_values(
    corr: *const OnebitCorrelation,
    values: *mut f64,
) -> OnebitStatus {
    guarded(|| {
        let c = match correlation_ref(corr) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if values.is_null() {
            set_error("null output pointer");
            return OnebitStatus::InvalidArgument;
        }
        match BinaryBox::new(c.clone()) {
            Ok(b) => {
                let f = chsh_values(&b);
                std::ptr::copy_nonoverlapping(f.as_ptr(), values, 4);
                OnebitStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Local fraction of a binary non-signaling box.
///
/// # Safety
/// `corr` must be a live binary-box handle; `alpha` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_local_fraction(
    corr: *const OnebitCorrelation,
    alpha: *mut f64,
) -> OnebitStatus {
    guarded(|| {
        let c = match correlation_ref(corr) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let b = match BinaryBox::new(c.clone()) {
            Ok(b) => b,
            Err(e) => return fail(&e),
        };
        match local_fraction(&b) {
            Ok((a, _)) => write_f64(alpha, a),
            Err(e) => fail(&e),
        }
    })
}

/// Optimal deterministic assisted success probability for a channel and a
/// non-signaling device.
///
/// # Safety
/// `ch` and `corr` must be live handles; `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_optimal_assisted_succ(
    ch: *const OnebitChannel,
    corr: *const OnebitCorrelation,
    value: *mut f64,
) -> OnebitStatus {
    guarded(|| {
        let channel = match channel_ref(ch) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let device = match correlation_ref(corr) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match onebit::protocol::optimal_assisted_succ(channel, device) {
            Ok(r) => write_f64(value, r.value),
            Err(e) => fail(&e),
        }
    })
}
