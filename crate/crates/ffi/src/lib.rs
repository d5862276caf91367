//! C ABI for `eofkit`.
//!
//! States, operators and channels cross the boundary as opaque handles
//! created by `eof_*_new`/`eof_*_from_json` and released with the matching
//! `eof_*_free`. Every fallible call returns an [`EofStatus`]; on failure
//! [`eof_last_error`] describes what went wrong on the calling thread.
//! Matrices are row-major with interleaved `(re, im)` pairs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use eofkit::duality::{conjugate_e, dual_lower_bound, fhat_dual_estimate, g_direct, g_eigen};
use eofkit::optim::SearchOptions;
use eofkit::purity::{h_p, multiplicativity_gap, nu_q, werner_holevo_channel, KrausChannel};
use eofkit::roof::{eof_roof, wootters_eof, RoofOptions};
use eofkit::spectra::json::{density_from_json, operator_from_json};
use eofkit::spectra::{BipartiteDims, CMat, DensityMatrix, HermitianOperator, C64};
use eofkit::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EofStatus {
    Ok = 0,
    NullPointer = 1,
    Shape = 2,
    Domain = 3,
    Parameter = 4,
    Unsupported = 5,
    Decomposition = 6,
    Schema = 7,
    Io = 8,
    InvalidUtf8 = 9,
    Panic = 10,
}

impl From<&Error> for EofStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Shape(_) => EofStatus::Shape,
            Error::Domain(_) => EofStatus::Domain,
            Error::Parameter(_) => EofStatus::Parameter,
            Error::Unsupported(_) => EofStatus::Unsupported,
            Error::Decomposition { .. } => EofStatus::Decomposition,
            Error::Schema { .. } | Error::Json(_) => EofStatus::Schema,
            Error::Io(_) => EofStatus::Io,
        }
    }
}

/// Search budget; pass NULL for the defaults (16 restarts, seed 0).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EofSearchOptions {
    pub restarts: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EofGMethod {
    Direct = 0,
    Eigen = 1,
}

/// Opaque density matrix.
pub struct EofDensity(DensityMatrix);

/// Opaque Hermitian operator.
pub struct EofOperator(HermitianOperator);

/// Opaque Kraus channel.
pub struct EofChannel(KrausChannel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Failure {
    Null(&'static str),
    Utf8,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, records any failure and converts it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EofStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            EofStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            EofStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("input is not valid UTF-8".into());
            EofStatus::InvalidUtf8
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            EofStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            EofStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::Null("json"));
    }
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| Failure::Utf8)
}

unsafe fn matrix(data: *const f64, len: usize, n: usize) -> Result<CMat, Failure> {
    if data.is_null() {
        return Err(Failure::Null("data"));
    }
    if len != 2 * n * n {
        return Err(Error::Shape(format!(
            "expected {} doubles for a {n}x{n} complex matrix, got {len}",
            2 * n * n
        ))
        .into());
    }
    let v = unsafe { std::slice::from_raw_parts(data, len) };
    Ok(CMat::from_row_iterator(
        n,
        n,
        v.chunks_exact(2).map(|z| C64::new(z[0], z[1])),
    ))
}

fn search(opts: *const EofSearchOptions) -> SearchOptions {
    match unsafe { opts.as_ref() } {
        Some(o) => SearchOptions::default()
            .with_restarts(o.restarts)
            .with_seed(o.seed),
        None => SearchOptions::default(),
    }
}

fn dims(dim_a: usize, dim_b: usize, copies: usize) -> Result<BipartiteDims, Failure> {
    Ok(BipartiteDims::new(dim_a, dim_b, copies)?)
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `eof_*` call on the same thread.
#[no_mangle]
pub extern "C" fn eof_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// NUL-terminated crate version.
#[no_mangle]
pub extern "C" fn eof_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `data` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eof_density_new(
    dim_a: usize,
    dim_b: usize,
    copies: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut EofDensity,
) -> EofStatus {
    guard(|| {
        let d = dims(dim_a, dim_b, copies)?;
        let m = unsafe { matrix(data, len, d.total()) }?;
        let rho = DensityMatrix::new(d, m)?;
        unsafe { write(out, Box::into_raw(Box::new(EofDensity(rho))), "out") }
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eof_density_from_json(
    json: *const c_char,
    out: *mut *mut EofDensity,
) -> EofStatus {
    guard(|| {
        let rho = density_from_json(unsafe { text(json) }?)?;
        unsafe { write(out, Box::into_raw(Box::new(EofDensity(rho))), "out") }
    })
}

/// # Safety
/// `rho` must come from `eof_density_new`/`eof_density_from_json` and not
/// have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn eof_density_free(rho: *mut EofDensity) {
    if !rho.is_null() {
        drop(unsafe { Box::from_raw(rho) });
    }
}

/// # Safety
/// `data` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eof_operator_new(
    dim_a: usize,
    dim_b: usize,
    copies: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut EofOperator,
) -> EofStatus {
    guard(|| {
        let d = dims(dim_a, dim_b, copies)?;
        let m = unsafe { matrix(data, len, d.total()) }?;
        let h = HermitianOperator::new(d, m)?;
        unsafe { write(out, Box::into_raw(Box::new(EofOperator(h))), "out") }
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eof_operator_from_json(
    json: *const c_char,
    out: *mut *mut EofOperator,
) -> EofStatus {
    guard(|| {
        let h = operator_from_json(unsafe { text(json) }?)?;
        unsafe { write(out, Box::into_raw(Box::new(EofOperator(h))), "out") }
    })
}

/// # Safety
/// `op` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn eof_operator_free(op: *mut EofOperator) {
    if !op.is_null() {
        drop(unsafe { Box::from_raw(op) });
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eof_channel_from_json(
    json: *const c_char,
    out: *mut *mut EofChannel,
) -> EofStatus {
    guard(|| {
        let ch = KrausChannel::from_json(unsafe { text(json) }?)?;
        unsafe { write(out, Box::into_raw(Box::new(EofChannel(ch))), "out") }
    })
}

/// Werner-Holevo channel on `C^d`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eof_channel_werner_holevo(
    d: usize,
    out: *mut *mut EofChannel,
) -> EofStatus {
    guard(|| {
        let ch = werner_holevo_channel(d)?;
        unsafe { write(out, Box::into_raw(Box::new(EofChannel(ch))), "out") }
    })
}

/// # Safety
/// `ch` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn eof_channel_free(ch: *mut EofChannel) {
    if !ch.is_null() {
        drop(unsafe { Box::from_raw(ch) });
    }
}

/// Closed-form entanglement of formation of a two-qubit state, in nats.
///
/// # Safety
/// `rho` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eof_wootters(rho: *const EofDensity, out: *mut f64) -> EofStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        let v = wootters_eof(&rho.0)?;
        unsafe { write(out, v, "out") }
    })
}

/// Convex-roof upper bound on the entanglement of formation.
///
/// # Safety
/// `rho` must be a live handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eof_roof_value(
    rho: *const EofDensity,
    opts: *const EofSearchOptions,
    out: *mut f64,
) -> EofStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        let mut ro = RoofOptions::default();
        if let Some(o) = unsafe { opts.as_ref() } {
            ro = ro.with_restarts(o.restarts).with_seed(o.seed);
        }
        let v = eof_roof(&rho.0, &ro)?.value;
        unsafe { write(out, v, "out") }
    })
}

/// `E*(X) = max_ψ ⟨ψ|X|ψ⟩ − E(ψ)`.
///
/// # Safety
/// `x` must be a live handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eof_conjugate(
    x: *const EofOperator,
    opts: *const EofSearchOptions,
    out: *mut f64,
) -> EofStatus {
    guard(|| {
        let x = unsafe { deref(x, "x") }?;
        let v = conjugate_e(&x.0, &search(opts))?.value;
        unsafe { write(out, v, "out") }
    })
}

/// `g(M) = E*(log M)`; `-INFINITY` when the support of `M` holds no
/// product vector.
///
/// # Safety
/// `m` must be a live handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eof_g(
    m: *const EofOperator,
    method: EofGMethod,
    opts: *const EofSearchOptions,
    out: *mut f64,
) -> EofStatus {
    guard(|| {
        let m = unsafe { deref(m, "m") }?;
        let r = match method {
            EofGMethod::Direct => g_direct(&m.0, &search(opts))?,
            EofGMethod::Eigen => g_eigen(&m.0, &search(opts))?,
        };
        unsafe { write(out, r.value.to_f64(), "out") }
    })
}

/// `h_p(M)` for `0 < p ≤ 1` and `0 ≤ M ≤ 𝕀`.
///
/// # Safety
/// `m` must be a live handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eof_h_p(
    m: *const EofOperator,
    p: f64,
    opts: *const EofSearchOptions,
    out: *mut f64,
) -> EofStatus {
    guard(|| {
        let m = unsafe { deref(m, "m") }?;
        let v = h_p(&m.0, p, &search(opts))?.value;
        unsafe { write(out, v, "out") }
    })
}

/// Maximal output purity `ν_q` (`q ≥ 1`, `q = INFINITY` allowed).
///
/// # Safety
/// `ch` must be a live handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eof_nu_q(
    ch: *const EofChannel,
    q: f64,
    opts: *const EofSearchOptions,
    out: *mut f64,
) -> EofStatus {
    guard(|| {
        let ch = unsafe { deref(ch, "channel") }?;
        let v = nu_q(&ch.0, q, &search(opts))?.value;
        unsafe { write(out, v, "out") }
    })
}

/// `ln ν_q(Λ₁⊗Λ₂) − ln ν_q(Λ₁) − ln ν_q(Λ₂)` written with the sign
/// convention of the library: negative when multiplicativity fails.
///
/// # Safety
/// Handles must be live, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eof_multiplicativity_gap(
    l1: *const EofChannel,
    l2: *const EofChannel,
    q: f64,
    opts: *const EofSearchOptions,
    out: *mut f64,
) -> EofStatus {
    guard(|| {
        let l1 = unsafe { deref(l1, "l1") }?;
        let l2 = unsafe { deref(l2, "l2") }?;
        let r = multiplicativity_gap(&l1.0, &l2.0, q, &search(opts))?;
        unsafe { write(out, r.gap.gap, "out") }
    })
}

/// `Tr[ρX] − E*(X)`, a lower bound on the entanglement of formation.
///
/// # Safety
/// Handles must be live, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eof_dual_lower_bound(
    rho: *const EofDensity,
    x: *const EofOperator,
    opts: *const EofSearchOptions,
    out: *mut f64,
) -> EofStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        let x = unsafe { deref(x, "x") }?;
        let v = dual_lower_bound(&rho.0, &x.0, &search(opts))?;
        unsafe { write(out, v, "out") }
    })
}

/// Best dual lower bound found with `‖X‖_∞ ≤ cap`.
///
/// # Safety
/// `rho` must be a live handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eof_dual_estimate(
    rho: *const EofDensity,
    cap: f64,
    opts: *const EofSearchOptions,
    out: *mut f64,
) -> EofStatus {
    guard(|| {
        let rho = unsafe { deref(rho, "rho") }?;
        let v = fhat_dual_estimate(&rho.0, cap, &search(opts))?.value;
        unsafe { write(out, v, "out") }
    })
}
