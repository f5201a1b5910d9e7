//! C ABI over the `courant` crate.
//!
//! Every fallible call returns a [`CourantStatus`]; on failure the message is
//! kept per thread and read back with [`courant_last_error`]. Objects are
//! opaque handles released with their `_free` function. Strings returned to
//! the caller are released with [`courant_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use courant::counting::{CountingTriple, NumericSpectrum, Spectrum};
use courant::eigensolver::{assemble_free, smallest_k, EigenPair};
use courant::exact_spectra::{enumerate, ExactSpectrum, RectSpec, Scale};
use courant::fixtures::Fixture;
use courant::grid::GridGeometry;
use courant::nodal::extract;
use courant::partition_check::{check_main, FamilyReport, MainVariant};
use courant::{rational, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CourantStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or an index out of range.
    InvalidArgument = 1,
    InvalidSpec = 2,
    InsufficientCutoff = 3,
    InsufficientSpectrum = 4,
    Precondition = 5,
    DegenerateInput = 6,
    Convergence = 7,
    Parse = 8,
    Io = 9,
    /// A panic inside the library.
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CourantScale {
    Unit = 0,
    PiSquared = 1,
}

/// `n̲`, `n` and `n̄` at one energy.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CourantCounts {
    pub n_lower: usize,
    pub n_mid: usize,
    pub n_upper: usize,
    pub is_eigenvalue: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CourantMainResult {
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
    pub equality: bool,
    pub on_spectrum: bool,
}

pub struct CourantExactSpectrum {
    inner: ExactSpectrum,
}

pub struct CourantNumericSpectrum {
    inner: NumericSpectrum,
}

pub struct CourantEigenResult {
    geometry: GridGeometry,
    pairs: Vec<EigenPair>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CourantStatus {
    match e {
        Error::InvalidSpec(_) | Error::InvalidMerge(_) | Error::EmptyDomain => CourantStatus::InvalidSpec,
        Error::InsufficientCutoff(_) => CourantStatus::InsufficientCutoff,
        Error::InsufficientSpectrum(_) => CourantStatus::InsufficientSpectrum,
        Error::Precondition(_) => CourantStatus::Precondition,
        Error::DegenerateInput(_) | Error::NonFinite(_) => CourantStatus::DegenerateInput,
        Error::Convergence { .. } => CourantStatus::Convergence,
        Error::Parse(_) | Error::Json(_) => CourantStatus::Parse,
        Error::Io(_) => CourantStatus::Io,
    }
}

enum Fail {
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CourantStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CourantStatus::Ok
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            CourantStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CourantStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Arg(format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Arg(format!("{what} is not UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail::Arg(format!("{what} is null")))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Arg("output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

fn counts(t: CountingTriple) -> CourantCounts {
    CourantCounts { n_lower: t.n_lower, n_mid: t.n_mid, n_upper: t.n_upper, is_eigenvalue: t.is_eigenvalue }
}

fn main_result(r: &FamilyReport) -> CourantMainResult {
    CourantMainResult {
        lhs: r.lhs,
        rhs: r.rhs,
        holds: r.holds,
        equality: r.equality,
        on_spectrum: r.variant == MainVariant::OnSpectrum,
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn courant_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn courant_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn courant_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exact spectrum `κ(p1 m² + p2 n²) ≤ κ q_max` of a rectangle; rationals as
/// decimal strings such as `"1/4"`.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_exact_spectrum_new(
    p1: *const c_char,
    p2: *const c_char,
    scale: CourantScale,
    q_max: *const c_char,
    out: *mut *mut CourantExactSpectrum,
) -> CourantStatus {
    guard(|| {
        let p1 = rational::parse(text(p1, "p1")?)?;
        let p2 = rational::parse(text(p2, "p2")?)?;
        let q_max = rational::parse(text(q_max, "q_max")?)?;
        let scale = match scale {
            CourantScale::Unit => Scale::Unit,
            CourantScale::PiSquared => Scale::PiSquared,
        };
        let inner = enumerate(&RectSpec::new(p1, p2, scale)?, &q_max)?;
        write(out, Box::into_raw(Box::new(CourantExactSpectrum { inner })))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn courant_exact_spectrum_free(s: *mut CourantExactSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of eigenvalues up to the cutoff, counted with multiplicity.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_exact_spectrum_len(s: *const CourantExactSpectrum, out: *mut usize) -> CourantStatus {
    guard(|| write(out, deref(s, "spectrum")?.inner.total_modes()))
}

/// `λ_k` (1-based) as a newly allocated rational string.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_exact_spectrum_kth(
    s: *const CourantExactSpectrum,
    k: usize,
    out: *mut *mut c_char,
) -> CourantStatus {
    guard(|| {
        let q = deref(s, "spectrum")?.inner.kth_eigenvalue(k)?;
        let c = CString::new(rational::format(q)).map_err(|_| Fail::Arg("bad string".into()))?;
        write(out, c.into_raw())
    })
}

/// `λ_k` (1-based) including the scale factor, as a double.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_exact_spectrum_kth_f64(
    s: *const CourantExactSpectrum,
    k: usize,
    out: *mut f64,
) -> CourantStatus {
    guard(|| {
        let s = &deref(s, "spectrum")?.inner;
        let q = s.kth_eigenvalue(k)?;
        write(out, rational::to_f64(q) * s.scale().factor())
    })
}

/// Counting functions at the rational energy `lambda`, in the spectrum's units.
///
/// # Safety
/// `s` must be a live handle; `lambda` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn courant_exact_spectrum_counts(
    s: *const CourantExactSpectrum,
    lambda: *const c_char,
    out: *mut CourantCounts,
) -> CourantStatus {
    guard(|| {
        let q = rational::parse(text(lambda, "lambda")?)?;
        write(out, counts(deref(s, "spectrum")?.inner.triple(&q)?))
    })
}

/// The spectrum as a newly allocated JSON string.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_exact_spectrum_to_json(
    s: *const CourantExactSpectrum,
    out: *mut *mut c_char,
) -> CourantStatus {
    guard(|| {
        let json = deref(s, "spectrum")?.inner.to_json().to_string();
        let c = CString::new(json).map_err(|_| Fail::Arg("bad string".into()))?;
        write(out, c.into_raw())
    })
}

/// Gathers `n` handles from a C array.
unsafe fn handles<'a, T>(subs: *const *const T, n: usize) -> Result<Vec<&'a T>, Fail> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if subs.is_null() {
        return Err(Fail::Arg("member array is null".into()));
    }
    std::slice::from_raw_parts(subs, n).iter().map(|&p| deref(p, "member")).collect()
}

/// Main counting inequality for a domain and `n_subs` disjoint members at a
/// rational energy.
///
/// # Safety
/// All handles must be live; `subs` must hold `n_subs` handles.
#[no_mangle]
pub unsafe extern "C" fn courant_check_main_exact(
    domain: *const CourantExactSpectrum,
    subs: *const *const CourantExactSpectrum,
    n_subs: usize,
    lambda: *const c_char,
    out: *mut CourantMainResult,
) -> CourantStatus {
    guard(|| {
        let q = rational::parse(text(lambda, "lambda")?)?;
        let subs: Vec<ExactSpectrum> = handles(subs, n_subs)?.into_iter().map(|s| s.inner.clone()).collect();
        let r = check_main(&deref(domain, "domain")?.inner, &subs, &q)?;
        write(out, main_result(&r))
    })
}

/// Numeric spectrum from `len` doubles; values within `cluster_tol·max(1,|λ|)`
/// of each other count as one eigenvalue.
///
/// # Safety
/// `values` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_numeric_spectrum_new(
    values: *const f64,
    len: usize,
    cluster_tol: f64,
    out: *mut *mut CourantNumericSpectrum,
) -> CourantStatus {
    guard(|| {
        let v = if len == 0 {
            Vec::new()
        } else if values.is_null() {
            return Err(Fail::Arg("values is null".into()));
        } else {
            std::slice::from_raw_parts(values, len).to_vec()
        };
        let inner = NumericSpectrum::new(v, cluster_tol)?;
        write(out, Box::into_raw(Box::new(CourantNumericSpectrum { inner })))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn courant_numeric_spectrum_free(s: *mut CourantNumericSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_numeric_spectrum_counts(
    s: *const CourantNumericSpectrum,
    lambda: f64,
    out: *mut CourantCounts,
) -> CourantStatus {
    guard(|| write(out, counts(deref(s, "spectrum")?.inner.triple(&lambda)?)))
}

/// # Safety
/// All handles must be live; `subs` must hold `n_subs` handles.
#[no_mangle]
pub unsafe extern "C" fn courant_check_main_numeric(
    domain: *const CourantNumericSpectrum,
    subs: *const *const CourantNumericSpectrum,
    n_subs: usize,
    lambda: f64,
    out: *mut CourantMainResult,
) -> CourantStatus {
    guard(|| {
        let subs: Vec<NumericSpectrum> = handles(subs, n_subs)?.into_iter().map(|s| s.inner.clone()).collect();
        let r = check_main(&deref(domain, "domain")?.inner, &subs, &lambda)?;
        write(out, main_result(&r))
    })
}

/// Lowest `k` Dirichlet eigenpairs on a named grid fixture (`"pi-square"`,
/// `"sec61-rect"`, `"sec61-halves"`, `"sec62"`, `"L-shape"`); `resolution` 0
/// picks the fixture's default.
///
/// # Safety
/// `fixture` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_grid_solve(
    fixture: *const c_char,
    resolution: usize,
    k: usize,
    tol: f64,
    seed: u64,
    out: *mut *mut CourantEigenResult,
) -> CourantStatus {
    guard(|| {
        let f: Fixture = text(fixture, "fixture")?.parse()?;
        let res = if resolution == 0 { f.default_resolution() } else { resolution };
        let geometry = f.grid(res)?;
        let pairs = smallest_k(&assemble_free(&geometry)?, k, tol, seed)?;
        write(out, Box::into_raw(Box::new(CourantEigenResult { geometry, pairs })))
    })
}

/// # Safety
/// `r` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn courant_eigen_result_free(r: *mut CourantEigenResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of eigenpairs and unknowns per eigenvector.
///
/// # Safety
/// `r` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_eigen_result_dims(
    r: *const CourantEigenResult,
    pairs: *mut usize,
    unknowns: *mut usize,
) -> CourantStatus {
    guard(|| {
        let r = deref(r, "result")?;
        write(pairs, r.pairs.len())?;
        write(unknowns, r.geometry.count())
    })
}

unsafe fn pair<'a>(r: *const CourantEigenResult, i: usize) -> Result<&'a EigenPair, Fail> {
    let r = deref(r, "result")?;
    r.pairs.get(i).ok_or_else(|| Fail::Arg(format!("pair {i} of {}", r.pairs.len())))
}

/// Eigenvalue and residual norm of pair `i` (0-based).
///
/// # Safety
/// `r` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_eigen_result_value(
    r: *const CourantEigenResult,
    i: usize,
    value: *mut f64,
    residual: *mut f64,
) -> CourantStatus {
    guard(|| {
        let p = pair(r, i)?;
        write(value, p.value)?;
        write(residual, p.residual)
    })
}

/// Copies eigenvector `i` into `buf`, which must hold `unknowns` doubles.
///
/// # Safety
/// `r` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn courant_eigen_result_vector(
    r: *const CourantEigenResult,
    i: usize,
    buf: *mut f64,
    len: usize,
) -> CourantStatus {
    guard(|| {
        let p = pair(r, i)?;
        if len != p.vector.len() {
            return Err(Fail::Arg(format!("buffer holds {len} values, vector has {}", p.vector.len())));
        }
        if buf.is_null() {
            return Err(Fail::Arg("buffer is null".into()));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&p.vector);
        Ok(())
    })
}

/// Number of nodal domains of eigenvector `i`.
///
/// # Safety
/// `r` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn courant_eigen_result_nodal_count(
    r: *const CourantEigenResult,
    i: usize,
    zero_tol: f64,
    out: *mut usize,
) -> CourantStatus {
    guard(|| {
        let p = pair(r, i)?;
        let d = extract(&p.vector, &deref(r, "result")?.geometry, zero_tol)?;
        write(out, d.mu())
    })
}
