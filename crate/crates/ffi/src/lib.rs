//! C ABI over `distbound`.
//!
//! Objects are opaque handles created by `db_*_new`/`db_*_from_*` calls and
//! released with the matching `db_*_free`. Every fallible call returns a
//! [`DbStatus`]; on failure [`db_last_error`] describes what went wrong on the
//! calling thread. Infinite distances and values cross the boundary as IEEE
//! `+inf`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use distbound::bounds::{best_curve, BoundCurve, CurveOptions};
use distbound::channels::chernoff_distance;
use distbound::cli::resolve_distance;
use distbound::embedding::classify;
use distbound::ext::{ExtReal, Finite, Infinity};
use distbound::oracle::{optimal_min_distance, DEFAULT_VERTEX_BUDGET};
use distbound::theta::{solve_theta, solve_theta_p, SolverOptions};
use distbound::{Composition, DistanceMatrix, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    /// A precondition of the requested bound does not hold.
    DomainError = 3,
    BudgetExceeded = 4,
    Infeasible = 5,
    Panic = 6,
}

/// A validated symbol distance matrix.
pub struct DbDistance {
    inner: DistanceMatrix,
}

/// An upper bound curve `(R, δ)`.
pub struct DbCurve {
    inner: BoundCurve,
}

/// Solver settings; obtain defaults from [`db_solver_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DbSolverOptions {
    pub starts: u32,
    pub seed: u64,
    pub max_iter: u32,
    pub gap_tol: f64,
}

/// Outcome of the squared-Euclidean classification. Each flag is 1, 0, or
/// -1 when the check was not evaluated.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DbEmbeddingFlags {
    pub divisible: i32,
    pub negative_type: i32,
    pub concave_form: i32,
    pub embeddable: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> DbStatus {
    match e {
        Error::Budget { .. } => DbStatus::BudgetExceeded,
        Error::Infeasible(_) => DbStatus::Infeasible,
        Error::WrongSymmetry
        | Error::WrongClass(_)
        | Error::ConditionNotMet(_)
        | Error::NotEmbeddable { .. } => DbStatus::DomainError,
        _ => DbStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), DbStatus>) -> DbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DbStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            DbStatus::Panic
        }
    }
}

trait Report<T> {
    fn report(self) -> Result<T, DbStatus>;
}

impl<T> Report<T> for distbound::Result<T> {
    fn report(self) -> Result<T, DbStatus> {
        self.map_err(|e| {
            set_error(e.to_string());
            status_of(&e)
        })
    }
}

fn null(what: &str) -> DbStatus {
    set_error(format!("{what} is null"));
    DbStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, DbStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        DbStatus::InvalidInput
    })
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], DbStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, DbStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

fn ext_to_f64(v: ExtReal) -> f64 {
    match v {
        Finite(x) => x,
        Infinity => f64::INFINITY,
    }
}

fn rho_arg(rho: f64) -> Result<ExtReal, DbStatus> {
    ExtReal::from_f64(rho).ok_or_else(|| {
        set_error("ρ is NaN");
        DbStatus::InvalidInput
    })
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), DbStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn db_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn db_solver_options_default() -> DbSolverOptions {
    let d = SolverOptions::default();
    DbSolverOptions {
        starts: d.starts as u32,
        seed: d.seed,
        max_iter: d.max_iter as u32,
        gap_tol: d.gap_tol,
    }
}

fn solver(o: Option<&DbSolverOptions>) -> SolverOptions {
    match o {
        None => SolverOptions::default(),
        Some(o) => SolverOptions {
            starts: o.starts as usize,
            seed: o.seed,
            max_iter: o.max_iter as usize,
            gap_tol: o.gap_tol,
        },
    }
}

/// Builds a distance from a built-in name (`hamming:4`, `pentagon`, ...), a
/// JSON file path, or an inline JSON document.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn db_distance_new(
    spec: *const c_char,
    out: *mut *mut DbDistance,
) -> DbStatus {
    guard(|| {
        let spec = str_arg(spec, "spec")?;
        let d = if spec.trim_start().starts_with('{') {
            DistanceMatrix::from_json(spec).report()?
        } else {
            resolve_distance(spec).report()?
        };
        write_out(out, Box::into_raw(Box::new(DbDistance { inner: d })))
    })
}

/// Builds a distance from a row-major `k×k` array; `+inf` entries are allowed.
///
/// # Safety
/// `entries` must point to `k*k` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_distance_from_matrix(
    entries: *const f64,
    k: usize,
    out: *mut *mut DbDistance,
) -> DbStatus {
    guard(|| {
        let flat = slice_arg(entries, k * k, "entries")?;
        let rows = flat
            .chunks(k.max(1))
            .map(|r| {
                r.iter()
                    .map(|v| ExtReal::from_f64(*v).ok_or(Error::InvalidInput("NaN entry".into())))
                    .collect::<distbound::Result<Vec<_>>>()
            })
            .collect::<distbound::Result<Vec<_>>>()
            .report()?;
        let d = DistanceMatrix::new(rows).report()?;
        write_out(out, Box::into_raw(Box::new(DbDistance { inner: d })))
    })
}

/// # Safety
/// `d` must come from a `db_distance_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn db_distance_free(d: *mut DbDistance) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Alphabet size, or 0 for a null handle.
///
/// # Safety
/// `d` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn db_distance_size(d: *const DbDistance) -> usize {
    d.as_ref().map_or(0, |d| d.inner.k())
}

/// # Safety
/// `d` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn db_distance_get(
    d: *const DbDistance,
    x: usize,
    y: usize,
    out: *mut f64,
) -> DbStatus {
    guard(|| {
        let d = handle(d, "distance")?;
        let k = d.inner.k();
        if x >= k || y >= k {
            set_error(format!("symbol out of range for K = {k}"));
            return Err(DbStatus::InvalidInput);
        }
        write_out(out, ext_to_f64(d.inner.get(x, y)))
    })
}

/// `ϑ(ρ)` when `p` is null, otherwise `ϑ(ρ, P)` with `p` of length K.
/// Pass `rho = +inf` for the zero-pattern variant; `opts` may be null.
///
/// # Safety
/// `d` must be live, `p` null or of length K, and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn db_theta(
    d: *const DbDistance,
    rho: f64,
    p: *const f64,
    opts: *const DbSolverOptions,
    out: *mut f64,
) -> DbStatus {
    guard(|| {
        let d = handle(d, "distance")?;
        let rho = rho_arg(rho)?;
        let opts = solver(opts.as_ref());
        let r = if p.is_null() {
            solve_theta(&d.inner, rho, &opts)
        } else {
            let p = slice_arg(p, d.inner.k(), "P")?;
            Composition::new(p.to_vec()).and_then(|p| solve_theta_p(&d.inner, rho, &p, &opts))
        }
        .report()?;
        write_out(out, ext_to_f64(r.value))
    })
}

/// # Safety
/// `d` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn db_classify(d: *const DbDistance, out: *mut DbEmbeddingFlags) -> DbStatus {
    guard(|| {
        let d = handle(d, "distance")?;
        let r = classify(&d.inner);
        let flag = |b: Option<bool>| b.map_or(-1, i32::from);
        write_out(
            out,
            DbEmbeddingFlags {
                divisible: i32::from(r.divisible),
                negative_type: flag(r.negative_type),
                concave_form: flag(r.concave_form),
                embeddable: flag(r.embeddable),
            },
        )
    })
}

/// Chernoff distance between two distributions of length `len`.
/// `argmin_s` may be null.
///
/// # Safety
/// `q1` and `q2` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn db_chernoff(
    q1: *const f64,
    q2: *const f64,
    len: usize,
    out: *mut f64,
    argmin_s: *mut f64,
) -> DbStatus {
    guard(|| {
        let a = slice_arg(q1, len, "q1")?;
        let b = slice_arg(q2, len, "q2")?;
        let r = chernoff_distance(a, b).report()?;
        if !argmin_s.is_null() {
            argmin_s.write(r.argmin_s);
        }
        write_out(out, ext_to_f64(r.value))
    })
}

/// Largest minimum distance of an `m`-word code of length `n`, searched
/// exhaustively.
///
/// # Safety
/// `d` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn db_optimal_min_distance(
    d: *const DbDistance,
    n: usize,
    m: usize,
    out: *mut f64,
) -> DbStatus {
    guard(|| {
        let d = handle(d, "distance")?;
        let r = optimal_min_distance(n, m, &d.inner, None, DEFAULT_VERTEX_BUDGET).report()?;
        write_out(out, ext_to_f64(r.distance))
    })
}

/// Best-of upper bound curve at `n_rates` rates. `p` (length K) restricts to
/// constant-composition codes and may be null; `opts` may be null.
///
/// # Safety
/// `d` must be live, `rates` must hold `n_rates` doubles, and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn db_curve_best(
    d: *const DbDistance,
    rates: *const f64,
    n_rates: usize,
    p: *const f64,
    opts: *const DbSolverOptions,
    out: *mut *mut DbCurve,
) -> DbStatus {
    guard(|| {
        let d = handle(d, "distance")?;
        let rates = slice_arg(rates, n_rates, "rates")?;
        let composition = if p.is_null() {
            None
        } else {
            Some(Composition::new(slice_arg(p, d.inner.k(), "P")?.to_vec()).report()?)
        };
        let co = CurveOptions {
            solver: solver(opts.as_ref()),
            composition,
            ..Default::default()
        };
        let curve = best_curve(&d.inner, rates, &co).report()?;
        write_out(out, Box::into_raw(Box::new(DbCurve { inner: curve })))
    })
}

/// # Safety
/// `c` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn db_curve_len(c: *const DbCurve) -> usize {
    c.as_ref().map_or(0, |c| c.inner.points.len())
}

/// Rate and bound of point `i`, in increasing rate order.
///
/// # Safety
/// `c` must be live; `r` and `delta` valid.
#[no_mangle]
pub unsafe extern "C" fn db_curve_point(
    c: *const DbCurve,
    i: usize,
    r: *mut f64,
    delta: *mut f64,
) -> DbStatus {
    guard(|| {
        let c = handle(c, "curve")?;
        let Some(p) = c.inner.points.get(i) else {
            set_error(format!("point {i} out of range"));
            return Err(DbStatus::InvalidInput);
        };
        write_out(r, p.r)?;
        write_out(delta, ext_to_f64(p.delta))
    })
}

/// CSV text `R,delta,method,params_json`; release with [`db_string_free`].
///
/// # Safety
/// `c` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn db_curve_to_csv(c: *const DbCurve, out: *mut *mut c_char) -> DbStatus {
    guard(|| {
        let c = handle(c, "curve")?;
        let s = CString::new(c.inner.to_csv()).map_err(|_| {
            set_error("CSV contains NUL");
            DbStatus::InvalidInput
        })?;
        write_out(out, s.into_raw())
    })
}

/// # Safety
/// `c` must come from [`db_curve_best`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn db_curve_free(c: *mut DbCurve) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn db_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::WrongSymmetry), DbStatus::DomainError);
        assert_eq!(
            status_of(&Error::Budget {
                what: "x",
                needed: 2,
                limit: 1
            }),
            DbStatus::BudgetExceeded
        );
        assert_eq!(
            status_of(&Error::InvalidInput("x".into())),
            DbStatus::InvalidInput
        );
    }

    #[test]
    fn errors_are_thread_local() {
        set_error("boom");
        let here = unsafe { CStr::from_ptr(db_last_error()) }
            .to_str()
            .unwrap()
            .to_owned();
        assert_eq!(here, "boom");
        std::thread::spawn(|| assert!(db_last_error().is_null()))
            .join()
            .unwrap();
    }
}
