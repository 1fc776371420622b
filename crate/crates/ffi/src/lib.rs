//! C interface to `qftconv`.
//!
//! Every fallible function returns a [`QcStatus`]; on failure the message is
//! available from [`qc_last_error`] on the same thread. Objects are opaque
//! handles released with their `*_free` function, and strings returned
//! through `char **` out-parameters are released with [`qc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qftconv::fields::{GaussianMeasure, MomentumGrid, RegularizedPropagator};
use qftconv::hopf::Tree;
use qftconv::rational::{fmt_q, parse_q, to_f64, Q};
use qftconv::renorm::{Bphz, ToyFeynmanRules, ToyModelParams};
use qftconv::sequences::{binomial_free, pointwise_interaction, poisson_limit_check, DiscreteLaw};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DomainError = 4,
    OutOfRange = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: QcStatus, msg: impl Into<String>) -> QcStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting panics into `QcStatus::Panic`.
fn guard(f: impl FnOnce() -> QcStatus) -> QcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(QcStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, QcStatus> {
    if s.is_null() {
        return Err(fail(QcStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(QcStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn read_q(s: *const c_char) -> Result<Q, QcStatus> {
    let text = read_str(s)?;
    parse_q(text).ok_or_else(|| fail(QcStatus::ParseError, format!("'{text}' is not a rational number")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> QcStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            QcStatus::Ok
        }
        Err(_) => fail(QcStatus::DomainError, "output contains a nul byte"),
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(QcStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn qc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn qc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- trees ----

/// Rooted tree.
pub struct QcTree(Tree);

/// Parses the parenthesis encoding, e.g. `"(()())"`.
///
/// # Safety
/// `encoding` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qc_tree_parse(encoding: *const c_char, out: *mut *mut QcTree) -> QcStatus {
    non_null!(out);
    guard(|| {
        let text = try_ffi!(read_str(encoding));
        match Tree::parse(text) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(QcTree(t)));
                QcStatus::Ok
            }
            Err(e) => fail(QcStatus::ParseError, e.to_string()),
        }
    })
}

/// Number of vertices; 0 for a null handle.
///
/// # Safety
/// `tree` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_tree_size(tree: *const QcTree) -> usize {
    tree.as_ref().map_or(0, |t| t.0.size())
}

/// # Safety
/// `tree` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn qc_tree_free(tree: *mut QcTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Renormalized amplitude `R(t)` under the tree-factorial rules, as JSON
/// `{"order", "terms"}`. `scale_log` may be null for a symbolic `L`; an
/// `order` below zero selects size + 2.
///
/// # Safety
/// `tree` must be a live handle, `scale_log` null or a C string, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qc_tree_renormalize_json(
    tree: *const QcTree,
    scale_log: *const c_char,
    order: i32,
    out: *mut *mut c_char,
) -> QcStatus {
    non_null!(tree, out);
    guard(|| {
        let t = &(*tree).0;
        let order = if order < 0 { t.size() as i32 + 2 } else { order };
        let params = if scale_log.is_null() {
            ToyModelParams::symbolic(order)
        } else {
            ToyModelParams::with_scale_log(try_ffi!(read_q(scale_log)), order)
        };
        match Bphz::new(ToyFeynmanRules::new(params)).renormalize(t) {
            Ok(r) => write_string(out, r.to_json().to_string()),
            Err(e) => fail(QcStatus::DomainError, e.to_string()),
        }
    })
}

// ---- exact laws ----

/// Law on the natural numbers with exact rational masses.
pub struct QcLaw(DiscreteLaw<Q>);

unsafe fn put_law(out: *mut *mut QcLaw, law: DiscreteLaw<Q>) -> QcStatus {
    *out = Box::into_raw(Box::new(QcLaw(law)));
    QcStatus::Ok
}

/// `Bin(n, p)` with `p` given as `"num/den"` or a decimal.
///
/// # Safety
/// `p` must be a C string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qc_law_binomial(n: usize, p: *const c_char, out: *mut *mut QcLaw) -> QcStatus {
    non_null!(out);
    guard(|| match binomial_free(n, try_ffi!(read_q(p))) {
        Ok(law) => put_law(out, law),
        Err(e) => fail(QcStatus::DomainError, e.to_string()),
    })
}

/// Pointwise-interacting law with weights `a^k b^(n−k)`.
///
/// # Safety
/// `p`, `a`, `b` must be C strings and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qc_law_pointwise(
    n: usize,
    p: *const c_char,
    a: *const c_char,
    b: *const c_char,
    out: *mut *mut QcLaw,
) -> QcStatus {
    non_null!(out);
    guard(|| {
        let (p, a, b) = (try_ffi!(read_q(p)), try_ffi!(read_q(a)), try_ffi!(read_q(b)));
        match pointwise_interaction(n, p, a, b) {
            Ok(law) => put_law(out, law),
            Err(e) => fail(QcStatus::DomainError, e.to_string()),
        }
    })
}

/// Largest point carrying mass; 0 for a null handle.
///
/// # Safety
/// `law` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_law_order(law: *const QcLaw) -> usize {
    law.as_ref().map_or(0, |l| l.0.order())
}

/// Mass at `k` as a double.
///
/// # Safety
/// `law` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qc_law_mass(law: *const QcLaw, k: usize, out: *mut f64) -> QcStatus {
    non_null!(law, out);
    *out = to_f64(&(*law).0.mass(k));
    QcStatus::Ok
}

/// Mass at `k` rendered exactly as `"num/den"`.
///
/// # Safety
/// `law` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qc_law_mass_exact(law: *const QcLaw, k: usize, out: *mut *mut c_char) -> QcStatus {
    non_null!(law, out);
    write_string(out, fmt_q(&(*law).0.mass(k)))
}

/// # Safety
/// `law` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn qc_law_free(law: *mut QcLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// Total variation between `Bin(n, λ/n)` and `Poisson(λ)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qc_poisson_limit_tv(n: u64, lambda: f64, out: *mut f64) -> QcStatus {
    non_null!(out);
    guard(|| match poisson_limit_check(n, lambda) {
        Ok(r) => {
            *out = r.total_variation;
            QcStatus::Ok
        }
        Err(e) => fail(QcStatus::DomainError, e.to_string()),
    })
}

// ---- Gaussian measures ----

/// Gaussian measure on a periodic lattice, diagonal in momentum space.
pub struct QcMeasure(GaussianMeasure);

/// Measure with the sharp-band propagator on `ir² ≤ p² < uv²`; pass
/// `INFINITY` for no upper cutoff.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qc_measure_sharp(n: usize, mass: f64, ir: f64, uv: f64, out: *mut *mut QcMeasure) -> QcStatus {
    non_null!(out);
    guard(|| {
        let prop = MomentumGrid::new(n, mass).and_then(|g| RegularizedPropagator::sharp(&g, ir, uv));
        match prop {
            Ok(p) => {
                *out = Box::into_raw(Box::new(QcMeasure(GaussianMeasure::new(p))));
                QcStatus::Ok
            }
            Err(e) => fail(QcStatus::DomainError, e.to_string()),
        }
    })
}

/// Convolution: covariances add.
///
/// # Safety
/// `a`, `b` must be live handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn qc_measure_convolve(a: *const QcMeasure, b: *const QcMeasure, out: *mut *mut QcMeasure) -> QcStatus {
    non_null!(a, b, out);
    guard(|| match (*a).0.convolve(&(*b).0) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(QcMeasure(m)));
            QcStatus::Ok
        }
        Err(e) => fail(QcStatus::DomainError, e.to_string()),
    })
}

/// Number of modes; 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_measure_modes(m: *const QcMeasure) -> usize {
    m.as_ref().map_or(0, |m| m.0.covariance().len())
}

/// Copies the per-mode covariance into `buf`, which must hold `len` values
/// with `len` equal to the number of modes.
///
/// # Safety
/// `m` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn qc_measure_covariance(m: *const QcMeasure, buf: *mut f64, len: usize) -> QcStatus {
    non_null!(m, buf);
    let cov = (*m).0.covariance();
    if len != cov.len() {
        return fail(QcStatus::OutOfRange, format!("buffer holds {len} values, measure has {} modes", cov.len()));
    }
    std::slice::from_raw_parts_mut(buf, len).copy_from_slice(cov);
    QcStatus::Ok
}

/// # Safety
/// `m` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn qc_measure_free(m: *mut QcMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

// ---- CLI ----

/// Runs the command line with `argv[0..argc]` (without the program name).
/// The report goes to `*out` (free with [`qc_string_free`]), the process
/// exit code to `*exit_code`; diagnostics are available from
/// [`qc_last_error`] when the code is nonzero.
///
/// # Safety
/// `argv` must hold `argc` C strings; `out` and `exit_code` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qc_cli_run(argc: c_int, argv: *const *const c_char, out: *mut *mut c_char, exit_code: *mut c_int) -> QcStatus {
    non_null!(out, exit_code);
    if argc < 0 || (argc > 0 && argv.is_null()) {
        return fail(QcStatus::NullPointer, "invalid argv");
    }
    guard(|| {
        let mut args = vec!["qftconv".to_string()];
        for i in 0..argc as usize {
            args.push(try_ffi!(read_str(*argv.add(i))).to_string());
        }
        let outcome = qftconv::cli::run(args);
        *exit_code = outcome.code;
        if outcome.code != 0 {
            set_error(outcome.stderr.trim_end());
        }
        write_string(out, outcome.stdout)
    })
}
