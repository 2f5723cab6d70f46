//! C ABI over the attack toolkit.
//!
//! Every call returns an `RaStatus` code; results come back through out
//! pointers and caller-owned buffers. Datasets and fits are opaque handles
//! released with their `_free` function. After a failure,
//! `ra_last_error_message` holds a description for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use regattack::bench::{self, CsvOptions};
use regattack::matkit::Matrix;
use regattack::onepoint::{attack_coefficient, Sense};
use regattack::polyatk::{build_quartic, solve_quartic};
use regattack::rankone::{alternating_attack, AltOptions, Direction, RankOneContext};
use regattack::regress::{fit_ols, Dataset, RegressionFit};
use regattack::sdpcore::SdpOptions;
use regattack::Error;

/// Status codes returned by every function.
#[allow(non_camel_case_types)]
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RaStatus {
    RA_OK = 0,
    RA_ERR_NULL = 1,
    RA_ERR_DIMENSION = 2,
    RA_ERR_INVALID = 3,
    RA_ERR_SINGULAR = 4,
    RA_ERR_NUMERICAL = 5,
    RA_ERR_UNBOUNDED = 6,
    RA_ERR_PARSE = 7,
    RA_ERR_IO = 8,
    RA_ERR_BUFFER = 9,
    RA_ERR_PANIC = 10,
}

/// Feature matrix and response.
pub struct RaDataset(Dataset);

/// Clean least-squares fit of a dataset.
pub struct RaFit {
    fit: RegressionFit,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RaStatus {
    match e {
        Error::Dimension(_) => RaStatus::RA_ERR_DIMENSION,
        Error::Singular { .. } | Error::NotPositiveDefinite { .. } | Error::DegenerateTarget(_) => {
            RaStatus::RA_ERR_SINGULAR
        }
        Error::Unbounded { .. } => RaStatus::RA_ERR_UNBOUNDED,
        Error::Parse { .. } => RaStatus::RA_ERR_PARSE,
        Error::Io(_) => RaStatus::RA_ERR_IO,
        Error::Numerical(_) | Error::IncompleteMoments(_) | Error::NotSymmetric(_) => RaStatus::RA_ERR_NUMERICAL,
        Error::InvalidArgument(_) | Error::InfeasibleRecovery(_) | Error::OrderTooLow { .. } => RaStatus::RA_ERR_INVALID,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (RaStatus, String)>) -> RaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            RaStatus::RA_OK
        }
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            RaStatus::RA_ERR_PANIC
        }
    }
}

type Failure = (RaStatus, String);

fn fail(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> Failure {
    (RaStatus::RA_ERR_NULL, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out(p: *mut f64, cap: usize, values: &[f64], what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if cap < values.len() {
        return Err((
            RaStatus::RA_ERR_BUFFER,
            format!("{what} holds {cap} values, {} needed", values.len()),
        ));
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), p, values.len());
    Ok(())
}

unsafe fn put<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

unsafe fn fit_ref<'a>(fit: *const RaFit) -> Result<&'a RaFit, Failure> {
    fit.as_ref().ok_or_else(|| null("fit"))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ra_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ra_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a dataset from a row-major n×m matrix and n responses.
///
/// # Safety
/// `x` must hold n·m doubles, `y` n doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ra_dataset_new(
    x: *const f64,
    n: usize,
    m: usize,
    y: *const f64,
    out: *mut *mut RaDataset,
) -> RaStatus {
    guard(|| {
        let xs = slice(x, n * m, "x")?.to_vec();
        let ys = slice(y, n, "y")?.to_vec();
        let mat = Matrix::from_row_major(n, m, xs).map_err(fail)?;
        let ds = Dataset::new(mat, ys).map_err(fail)?;
        put(out, Box::into_raw(Box::new(RaDataset(ds))), "out")
    })
}

/// Loads a CSV file: header row, first non-date column is the response.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ra_dataset_load_csv(path: *const c_char, out: *mut *mut RaDataset) -> RaStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (RaStatus::RA_ERR_INVALID, "path is not UTF-8".to_string()))?;
        let ds = bench::load_csv(p, &CsvOptions::default()).map_err(fail)?;
        put(out, Box::into_raw(Box::new(RaDataset(ds))), "out")
    })
}

/// The seeded 536×7 synthetic market.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ra_dataset_synthetic(seed: u64, out: *mut *mut RaDataset) -> RaStatus {
    guard(|| put(out, Box::into_raw(Box::new(RaDataset(bench::synthetic_market(seed)))), "out"))
}

/// # Safety
/// `ds` must be a live dataset handle; `n` and `m` writable.
#[no_mangle]
pub unsafe extern "C" fn ra_dataset_dims(ds: *const RaDataset, n: *mut usize, m: *mut usize) -> RaStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        put(n, ds.0.n(), "n")?;
        put(m, ds.0.m(), "m")
    })
}

/// # Safety
/// `ds` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn ra_dataset_free(ds: *mut RaDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Ordinary least squares on a dataset.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ra_fit_ols(ds: *const RaDataset, out: *mut *mut RaFit) -> RaStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let fit = fit_ols(&ds.0).map_err(fail)?;
        put(out, Box::into_raw(Box::new(RaFit { fit })), "out")
    })
}

/// # Safety
/// `fit` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn ra_fit_free(fit: *mut RaFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Copies the m clean coefficients into `beta`.
///
/// # Safety
/// `fit` must be live; `beta` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ra_fit_coefficients(fit: *const RaFit, beta: *mut f64, len: usize) -> RaStatus {
    guard(|| write_out(beta, len, &fit_ref(fit)?.fit.beta0, "beta"))
}

/// # Safety
/// `fit` must be live; `sigma` writable.
#[no_mangle]
pub unsafe extern "C" fn ra_fit_sigma_min(fit: *const RaFit, sigma: *mut f64) -> RaStatus {
    guard(|| put(sigma, fit_ref(fit)?.fit.sigma_min(), "sigma"))
}

/// Optimal single poisoning point against coefficient `index` (0-based).
/// `maximize` = 0 pushes the coefficient down, anything else pushes it up.
/// Writes m features into `x0`, the response into `y0` and the poisoned
/// coefficients into `beta`.
///
/// # Safety
/// `fit` must be live; `x0` and `beta` valid for `len` doubles; `y0` writable.
#[no_mangle]
pub unsafe extern "C" fn ra_attack_one(
    fit: *const RaFit,
    index: usize,
    eta: f64,
    maximize: i32,
    x0: *mut f64,
    y0: *mut f64,
    beta: *mut f64,
    len: usize,
) -> RaStatus {
    guard(|| {
        let f = &fit_ref(fit)?.fit;
        let sense = if maximize == 0 { Sense::Minimize } else { Sense::Maximize };
        let p = attack_coefficient(f, index, eta, sense).map_err(fail)?;
        write_out(x0, len, &p.x0, "x0")?;
        write_out(beta, len, &p.predicted_beta, "beta")?;
        put(y0, p.y0, "y0")
    })
}

/// Multi-coefficient attack: push coefficient `index` to zero, weight
/// `lambda` on it and 1 on keeping the others, relaxation order `order`.
/// `certified` receives 1 when the relaxation certifies global optimality.
///
/// # Safety
/// As for `ra_attack_one`; `certified` writable.
#[no_mangle]
pub unsafe extern "C" fn ra_attack_multi(
    fit: *const RaFit,
    index: usize,
    eta: f64,
    lambda: f64,
    order: u32,
    x0: *mut f64,
    y0: *mut f64,
    beta: *mut f64,
    len: usize,
    certified: *mut i32,
) -> RaStatus {
    guard(|| {
        let f = &fit_ref(fit)?.fit;
        let qp = build_quartic(f, index, eta, lambda).map_err(fail)?;
        let res = solve_quartic(&qp, order, &SdpOptions::default()).map_err(fail)?;
        write_out(x0, len, &res.point.x0, "x0")?;
        write_out(beta, len, &res.point.predicted_beta, "beta")?;
        put(y0, res.point.y0, "y0")?;
        put(certified, res.globally_optimal() as i32, "certified")
    })
}

/// Rank-one attack X → X + c dᵀ lowering coefficient `index`, with budget
/// `eta_fraction`·σ_min. Writes n entries of c, m of d and the change in the
/// coefficient. Returns RA_ERR_UNBOUNDED when the fraction is at least 1.
///
/// # Safety
/// `fit` must be live; `c` valid for `c_len`, `d` for `d_len` doubles;
/// `objective` writable.
#[no_mangle]
pub unsafe extern "C" fn ra_attack_rankone(
    fit: *const RaFit,
    index: usize,
    eta_fraction: f64,
    seed: u64,
    c: *mut f64,
    c_len: usize,
    d: *mut f64,
    d_len: usize,
    objective: *mut f64,
) -> RaStatus {
    guard(|| {
        let f = &fit_ref(fit)?.fit;
        let m = f.m();
        if index >= m {
            return Err(fail(Error::InvalidArgument(format!("index {index} out of range"))));
        }
        let ctx = RankOneContext::new(f, Direction::Decrease.selector(m, index), eta_fraction * f.sigma_min())
            .map_err(fail)?;
        let r = alternating_attack(&ctx, seed, &AltOptions::default()).map_err(fail)?;
        write_out(c, c_len, &r.c, "c")?;
        write_out(d, d_len, &r.d, "d")?;
        put(objective, r.objective, "objective")
    })
}
