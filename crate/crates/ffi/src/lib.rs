//! C ABI for the rbm-lab numerical laboratory.
//!
//! The interface follows the usual opaque-handle pattern: callers create
//! an [`RbmConfig`], adjust it with string key/value pairs, run an
//! experiment, and read results through accessor functions. Every
//! fallible function returns an [`RbmStatus`] code; the message of the
//! most recent failure on the current thread is available through
//! [`rbm_last_error`]. Panics never cross the boundary — they are caught
//! and reported as `RBM_STATUS_PANIC`.
//!
//! Memory rules: every pointer returned by an `_new` or `_run` function
//! must be released with the matching `_free` function exactly once.
//! Handles are not thread-safe; share them across threads only with
//! external synchronization.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rbm_lab::harness::{
    formula_cdf, run_compare, ComparisonReport, ExperimentConfig, Mode,
};
use rbm_lab::Error;

/// Status codes returned by every fallible function.
#[allow(non_camel_case_types)]
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbmStatus {
    /// The call succeeded.
    RBM_STATUS_OK = 0,
    /// An argument lies outside a routine's validity window.
    RBM_STATUS_DOMAIN = 1,
    /// Array or grid dimensions are inconsistent.
    RBM_STATUS_DIMENSION = 2,
    /// A numerical procedure failed its accuracy or stability contract.
    RBM_STATUS_NUMERICS = 3,
    /// Invalid configuration key or value.
    RBM_STATUS_CONFIG = 4,
    /// I/O failure.
    RBM_STATUS_IO = 5,
    /// A required pointer argument was null.
    RBM_STATUS_NULL_POINTER = 6,
    /// An internal panic was caught at the boundary.
    RBM_STATUS_PANIC = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> RbmStatus {
    match err {
        Error::Domain(_) => RbmStatus::RBM_STATUS_DOMAIN,
        Error::Dimension(_) => RbmStatus::RBM_STATUS_DIMENSION,
        Error::Numerics(_) => RbmStatus::RBM_STATUS_NUMERICS,
        Error::Config(_) => RbmStatus::RBM_STATUS_CONFIG,
        Error::Io(_) => RbmStatus::RBM_STATUS_IO,
    }
}

fn fail(err: &Error) -> RbmStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Runs `body` with panics converted to `RBM_STATUS_PANIC`.
fn guarded(body: impl FnOnce() -> RbmStatus) -> RbmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            RbmStatus::RBM_STATUS_PANIC
        }
    }
}

/// Opaque experiment configuration handle.
pub struct RbmConfig {
    inner: ExperimentConfig,
}

/// Opaque simulation-versus-formula comparison report handle.
pub struct RbmReport {
    inner: ComparisonReport,
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rbm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the message of the most recent error on the calling thread.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn rbm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates a configuration with default values (compare mode, t = 1000,
/// delta = 0.5, one observation point r = 0). Returns null only on
/// allocation failure.
#[no_mangle]
pub extern "C" fn rbm_config_new() -> *mut RbmConfig {
    Box::into_raw(Box::new(RbmConfig {
        inner: ExperimentConfig::new(Mode::Compare),
    }))
}

/// Releases a configuration handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rbm_config_free(config: *mut RbmConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Applies one key=value override. Keys match the configuration-file
/// format: mode, t, delta, r, s, trials, h, j, nodes, smax, seed,
/// format, out. Keys `r` and `s` accept comma-separated lists.
///
/// # Safety
/// `key` and `value` must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn rbm_config_set(
    config: *mut RbmConfig,
    key: *const c_char,
    value: *const c_char,
) -> RbmStatus {
    guarded(|| {
        let Some(config) = (unsafe { config.as_mut() }) else {
            set_error("config handle is null");
            return RbmStatus::RBM_STATUS_NULL_POINTER;
        };
        if key.is_null() || value.is_null() {
            set_error("key or value is null");
            return RbmStatus::RBM_STATUS_NULL_POINTER;
        }
        let parse = |p: *const c_char| unsafe { CStr::from_ptr(p) }.to_str();
        let (Ok(key), Ok(value)) = (parse(key), parse(value)) else {
            set_error("key or value is not valid UTF-8");
            return RbmStatus::RBM_STATUS_CONFIG;
        };
        match config.inner.set(key, value) {
            Ok(()) => RbmStatus::RBM_STATUS_OK,
            Err(err) => fail(&err),
        }
    })
}

/// Evaluates the limit CDF of the configured frame at the threshold
/// vector `s` of length `len` (one threshold per configured observation
/// point; the finite-step law when delta > 0, the stationary law at
/// delta = 0) and stores the probability in `out`.
///
/// # Safety
/// `s` must point to `len` readable doubles and `out` to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn rbm_limit_cdf(
    config: *const RbmConfig,
    s: *const c_double,
    len: usize,
    out: *mut c_double,
) -> RbmStatus {
    guarded(|| {
        let Some(config) = (unsafe { config.as_ref() }) else {
            set_error("config handle is null");
            return RbmStatus::RBM_STATUS_NULL_POINTER;
        };
        if s.is_null() || out.is_null() {
            set_error("s or out is null");
            return RbmStatus::RBM_STATUS_NULL_POINTER;
        }
        let thresholds = unsafe { std::slice::from_raw_parts(s, len) };
        match formula_cdf(&config.inner, thresholds) {
            Ok(value) => {
                unsafe { *out = value };
                RbmStatus::RBM_STATUS_OK
            }
            Err(err) => fail(&err),
        }
    })
}

/// Number of doubles `rbm_simulate` will write: trials × (number of
/// observation points).
#[no_mangle]
pub unsafe extern "C" fn rbm_sample_count(config: *const RbmConfig) -> usize {
    let Some(config) = (unsafe { config.as_ref() }) else {
        return 0;
    };
    config.inner.trials * config.inner.r_list.len()
}

/// Draws the configured Monte Carlo samples and writes them to `out` in
/// trial-major order (all observation points of trial 0, then trial 1,
/// ...). `capacity` must be at least `rbm_sample_count(config)`.
///
/// # Safety
/// `out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rbm_simulate(
    config: *const RbmConfig,
    out: *mut c_double,
    capacity: usize,
) -> RbmStatus {
    guarded(|| {
        let Some(config) = (unsafe { config.as_ref() }) else {
            set_error("config handle is null");
            return RbmStatus::RBM_STATUS_NULL_POINTER;
        };
        if out.is_null() {
            set_error("out is null");
            return RbmStatus::RBM_STATUS_NULL_POINTER;
        }
        let needed = config.inner.trials * config.inner.r_list.len();
        if capacity < needed {
            set_error(&format!("output capacity {capacity} < required {needed}"));
            return RbmStatus::RBM_STATUS_DIMENSION;
        }
        if let Err(err) = config.inner.validate() {
            return fail(&err);
        }
        match rbm_lab::harness::draw_samples(&config.inner) {
            Ok(samples) => {
                let flat: Vec<f64> = samples.into_iter().flatten().collect();
                let dest = unsafe { std::slice::from_raw_parts_mut(out, flat.len()) };
                dest.copy_from_slice(&flat);
                RbmStatus::RBM_STATUS_OK
            }
            Err(err) => fail(&err),
        }
    })
}

/// Runs a simulation-versus-formula comparison and stores the report
/// handle in `out`. The caller owns the report and must release it with
/// `rbm_report_free`.
///
/// # Safety
/// `out` must point to one writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rbm_compare(
    config: *const RbmConfig,
    out: *mut *mut RbmReport,
) -> RbmStatus {
    guarded(|| {
        let Some(config) = (unsafe { config.as_ref() }) else {
            set_error("config handle is null");
            return RbmStatus::RBM_STATUS_NULL_POINTER;
        };
        if out.is_null() {
            set_error("out is null");
            return RbmStatus::RBM_STATUS_NULL_POINTER;
        }
        unsafe { *out = ptr::null_mut() };
        match run_compare(&config.inner) {
            Ok(report) => {
                unsafe { *out = Box::into_raw(Box::new(RbmReport { inner: report })) };
                RbmStatus::RBM_STATUS_OK
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases a report handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rbm_report_free(report: *mut RbmReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Kolmogorov–Smirnov distance of the report (sup over the table of
/// |F_empirical − F_formula|). Returns NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rbm_report_ks(report: *const RbmReport) -> c_double {
    match unsafe { report.as_ref() } {
        Some(report) => report.inner.ks,
        None => f64::NAN,
    }
}

/// Number of rows in the comparison table. Returns 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rbm_report_len(report: *const RbmReport) -> usize {
    match unsafe { report.as_ref() } {
        Some(report) => report.inner.rows.len(),
        None => 0,
    }
}

/// Copies row `index` of the comparison table into the non-null output
/// pointers (threshold, empirical CDF, formula CDF, absolute gap).
///
/// # Safety
/// Each non-null output pointer must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn rbm_report_row(
    report: *const RbmReport,
    index: usize,
    s: *mut c_double,
    f_empirical: *mut c_double,
    f_formula: *mut c_double,
    abs_diff: *mut c_double,
) -> RbmStatus {
    guarded(|| {
        let Some(report) = (unsafe { report.as_ref() }) else {
            set_error("report handle is null");
            return RbmStatus::RBM_STATUS_NULL_POINTER;
        };
        let Some(row) = report.inner.rows.get(index) else {
            set_error(&format!(
                "row index {index} out of range (len {})",
                report.inner.rows.len()
            ));
            return RbmStatus::RBM_STATUS_DIMENSION;
        };
        unsafe {
            if !s.is_null() {
                *s = row.s;
            }
            if !f_empirical.is_null() {
                *f_empirical = row.f_empirical;
            }
            if !f_formula.is_null() {
                *f_formula = row.f_formula;
            }
            if !abs_diff.is_null() {
                *abs_diff = row.abs_diff;
            }
        }
        RbmStatus::RBM_STATUS_OK
    })
}

/// Renders the report as CSV. The returned string must be released with
/// `rbm_string_free`. Returns null for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rbm_report_csv(report: *const RbmReport) -> *mut c_char {
    let Some(report) = (unsafe { report.as_ref() }) else {
        return ptr::null_mut();
    };
    match CString::new(report.inner.to_csv()) {
        Ok(text) => text.into_raw(),
        Err(_) => ptr::null_mut(),
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `text` must have been returned by `rbm_report_csv` and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn rbm_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn set(config: *mut RbmConfig, key: &str, value: &str) -> RbmStatus {
        let key = CString::new(key).unwrap();
        let value = CString::new(value).unwrap();
        unsafe { rbm_config_set(config, key.as_ptr(), value.as_ptr()) }
    }

    #[test]
    fn version_is_non_empty() {
        let version = unsafe { CStr::from_ptr(rbm_version()) };
        assert!(!version.to_str().unwrap().is_empty());
    }

    #[test]
    fn config_set_reports_errors() {
        let config = rbm_config_new();
        assert_eq!(set(config, "t", "125"), RbmStatus::RBM_STATUS_OK);
        assert_eq!(set(config, "bogus", "1"), RbmStatus::RBM_STATUS_CONFIG);
        let message = unsafe { CStr::from_ptr(rbm_last_error()) };
        assert!(message.to_str().unwrap().contains("bogus"));
        assert_eq!(
            unsafe { rbm_config_set(ptr::null_mut(), ptr::null(), ptr::null()) },
            RbmStatus::RBM_STATUS_NULL_POINTER
        );
        unsafe { rbm_config_free(config) };
    }

    #[test]
    fn limit_cdf_matches_library_call() {
        let config = rbm_config_new();
        assert_eq!(set(config, "delta", "0.5"), RbmStatus::RBM_STATUS_OK);
        let mut value = f64::NAN;
        let s = [0.0f64];
        let status = unsafe { rbm_limit_cdf(config, s.as_ptr(), 1, &mut value) };
        assert_eq!(status, RbmStatus::RBM_STATUS_OK);
        assert!((0.0..=1.0).contains(&value));
        let direct = {
            let mut inner = rbm_lab::harness::ExperimentConfig::new(Mode::Compare);
            inner.delta = 0.5;
            formula_cdf(&inner, &[0.0]).unwrap()
        };
        assert_eq!(value, direct);
        unsafe { rbm_config_free(config) };
    }

    #[test]
    fn simulate_fills_buffer_deterministically() {
        let config = rbm_config_new();
        assert_eq!(set(config, "t", "27"), RbmStatus::RBM_STATUS_OK);
        assert_eq!(set(config, "trials", "4"), RbmStatus::RBM_STATUS_OK);
        assert_eq!(set(config, "r", "0,0.5"), RbmStatus::RBM_STATUS_OK);
        let n = unsafe { rbm_sample_count(config) };
        assert_eq!(n, 8);
        let mut a = vec![f64::NAN; n];
        let mut b = vec![f64::NAN; n];
        assert_eq!(
            unsafe { rbm_simulate(config, a.as_mut_ptr(), n) },
            RbmStatus::RBM_STATUS_OK
        );
        assert_eq!(
            unsafe { rbm_simulate(config, b.as_mut_ptr(), n) },
            RbmStatus::RBM_STATUS_OK
        );
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.is_finite()));
        assert_eq!(
            unsafe { rbm_simulate(config, a.as_mut_ptr(), n - 1) },
            RbmStatus::RBM_STATUS_DIMENSION
        );
        unsafe { rbm_config_free(config) };
    }

    #[test]
    fn compare_report_round_trip() {
        let config = rbm_config_new();
        assert_eq!(set(config, "t", "27"), RbmStatus::RBM_STATUS_OK);
        assert_eq!(set(config, "trials", "30"), RbmStatus::RBM_STATUS_OK);
        assert_eq!(set(config, "s", "-1,0,1"), RbmStatus::RBM_STATUS_OK);
        let mut report: *mut RbmReport = ptr::null_mut();
        assert_eq!(
            unsafe { rbm_compare(config, &mut report) },
            RbmStatus::RBM_STATUS_OK
        );
        assert_eq!(unsafe { rbm_report_len(report) }, 3);
        let ks = unsafe { rbm_report_ks(report) };
        let mut max_diff = 0.0f64;
        for i in 0..3 {
            let mut diff = f64::NAN;
            let status = unsafe {
                rbm_report_row(
                    report,
                    i,
                    ptr::null_mut(),
                    ptr::null_mut(),
                    ptr::null_mut(),
                    &mut diff,
                )
            };
            assert_eq!(status, RbmStatus::RBM_STATUS_OK);
            max_diff = max_diff.max(diff);
        }
        assert_eq!(ks, max_diff);
        let csv = unsafe { rbm_report_csv(report) };
        let text = unsafe { CStr::from_ptr(csv) }.to_str().unwrap().to_string();
        assert!(text.starts_with("s,F_empirical,F_formula,abs_diff\n"));
        unsafe { rbm_string_free(csv) };
        assert_eq!(
            unsafe {
                rbm_report_row(
                    report,
                    99,
                    ptr::null_mut(),
                    ptr::null_mut(),
                    ptr::null_mut(),
                    ptr::null_mut(),
                )
            },
            RbmStatus::RBM_STATUS_DIMENSION
        );
        unsafe { rbm_report_free(report) };
        unsafe { rbm_config_free(config) };
    }
}
