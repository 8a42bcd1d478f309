//! C ABI over the qtazrp solvers.
//!
//! Every fallible call returns a [`QtzStatus`] and writes its result through
//! an out-pointer. The message of the last failure on the calling thread is
//! available from [`qtz_last_error`]. Rational functions are returned as
//! opaque [`QtzRational`] handles that must be released with
//! [`qtz_rational_free`]; strings must be released with [`qtz_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qtazrp::config::LabeledConfig;
use qtazrp::contour::{qmoment_from_exponents, ContourSpec};
use qtazrp::exact::{cdf, hitting_prob_symbolic};
use qtazrp::montecarlo::estimate_cdf;
use qtazrp::qalg::QRationalFunction;
use qtazrp::Error;

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QtzStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Pole = 3,
    Resource = 4,
    Contour = 5,
    NumericalPole = 6,
    Consistency = 7,
    Parse = 8,
    Panic = 9,
}

/// Exact hitting probability as a rational function of `q`.
pub struct QtzRational(QRationalFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QtzStatus {
    match e {
        Error::Domain(_) => QtzStatus::Domain,
        Error::Pole(_) => QtzStatus::Pole,
        Error::Resource(_) => QtzStatus::Resource,
        Error::Contour(_) => QtzStatus::Contour,
        Error::NumericalPole(_) => QtzStatus::NumericalPole,
        Error::Consistency(_) => QtzStatus::Consistency,
        Error::Parse(_) => QtzStatus::Parse,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> QtzStatus
where
    F: FnOnce() -> Result<(), QtzFail>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QtzStatus::Ok,
        Ok(Err(QtzFail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QtzStatus::NullPointer
        }
        Ok(Err(QtzFail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            QtzStatus::Panic
        }
    }
}

enum QtzFail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for QtzFail {
    fn from(e: Error) -> Self {
        QtzFail::Lib(e)
    }
}

/// # Safety
/// `p` must be null or point to `n` readable values.
unsafe fn slice<'a, T>(p: *const T, n: usize, what: &'static str) -> Result<&'a [T], QtzFail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(QtzFail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// # Safety
/// `p` must be null or valid for a write of `T`.
unsafe fn write<T>(p: *mut T, v: T, what: &'static str) -> Result<(), QtzFail> {
    if p.is_null() {
        return Err(QtzFail::Null(what));
    }
    p.write(v);
    Ok(())
}

unsafe fn configs(
    x: *const i64,
    y: *const i64,
    n: usize,
) -> Result<(LabeledConfig, LabeledConfig), QtzFail> {
    let xs = slice(x, n, "x")?;
    let ys = slice(y, n, "y")?;
    Ok((LabeledConfig::new(xs.to_vec()), LabeledConfig::new(ys.to_vec())))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qtz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Exact probability that the embedded chain from `x` visits `y`.
///
/// # Safety
/// `x` and `y` must point to `n` integers and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qtz_hitting_symbolic(
    x: *const i64,
    y: *const i64,
    n: usize,
    out: *mut *mut QtzRational,
) -> QtzStatus {
    guard(|| {
        let (xc, yc) = configs(x, y, n)?;
        if out.is_null() {
            return Err(QtzFail::Null("out"));
        }
        let rf = hitting_prob_symbolic(&xc, &yc)?;
        write(out, Box::into_raw(Box::new(QtzRational(rf))), "out")
    })
}

/// Value of a rational function at `q`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qtz_rational_eval(h: *const QtzRational, q: f64, out: *mut f64) -> QtzStatus {
    guard(|| {
        let h = h.as_ref().ok_or(QtzFail::Null("handle"))?;
        let v = h.0.eval_f64(q)?;
        write(out, v, "out")
    })
}

/// Canonical text `(c0 + c1*q + ...)/(d0 + ...)`; release with
/// [`qtz_string_free`]. Null on failure.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qtz_rational_to_string(h: *const QtzRational) -> *mut c_char {
    let Some(h) = h.as_ref() else {
        set_error("null pointer: handle".into());
        return ptr::null_mut();
    };
    CString::new(h.0.to_string()).map_or(ptr::null_mut(), CString::into_raw)
}

/// Whether two handles hold the same canonical rational function.
///
/// # Safety
/// Both pointers must be null or live handles.
#[no_mangle]
pub unsafe extern "C" fn qtz_rational_equal(a: *const QtzRational, b: *const QtzRational) -> bool {
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => a.0 == b.0,
        _ => false,
    }
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qtz_rational_free(h: *mut QtzRational) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qtz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exact `P_x(X(t) <= y)` from the forward equations.
///
/// # Safety
/// `x` and `y` must point to `n` integers and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qtz_cdf_exact(
    x: *const i64,
    y: *const i64,
    n: usize,
    q: f64,
    t: f64,
    out: *mut f64,
) -> QtzStatus {
    guard(|| {
        let (xc, yc) = configs(x, y, n)?;
        let v = cdf(&xc, &yc, q, t)?;
        write(out, v, "out")
    })
}

/// Small-contour q-moment with exponents `m[0] >= m[1] >= ...`. `nodes = 0`
/// picks the node count automatically; `est_error` may be null.
///
/// # Safety
/// `m` must point to `len` integers; `out` must be writable and
/// `est_error` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qtz_qmoment_contour(
    m: *const i64,
    len: usize,
    q: f64,
    t: f64,
    nodes: usize,
    out: *mut f64,
    est_error: *mut f64,
) -> QtzStatus {
    guard(|| {
        let m = slice(m, len, "m")?;
        let mut spec = ContourSpec::small(q, len, 8)?;
        spec.nodes_per_circle = if nodes == 0 { spec.auto_nodes(q, 0) } else { nodes };
        let r = qmoment_from_exponents(m, t, q, &spec)?;
        let v = r.probability()?;
        if !est_error.is_null() {
            est_error.write(r.est_error);
        }
        write(out, v, "out")
    })
}

/// Monte Carlo estimate of `P_x(X(t) <= y)` with its standard error.
///
/// # Safety
/// `x` and `y` must point to `n` integers; `mean` and `stderr` must be
/// writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qtz_cdf_mc(
    x: *const i64,
    y: *const i64,
    n: usize,
    q: f64,
    t: f64,
    samples: u64,
    seed: u64,
    mean: *mut f64,
    stderr: *mut f64,
) -> QtzStatus {
    guard(|| {
        let (xc, yc) = configs(x, y, n)?;
        if mean.is_null() || stderr.is_null() {
            return Err(QtzFail::Null("mean/stderr"));
        }
        let e = estimate_cdf(&xc, &yc, t, q, samples, seed)?;
        write(mean, e.mean, "mean")?;
        write(stderr, e.stderr, "stderr")
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qtz_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
