//! C ABI over `forestalg`. Algebras and terms are opaque handles owned by
//! the caller and released with the matching `*_free` function. Every
//! fallible call returns an `FaStatus`; on failure the message is available
//! from `fa_last_error` until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use forestalg::algebra::{parse_algebra, Homomorphism};
use forestalg::congruence::{equiv_n, TauPi};
use forestalg::fixtures::fixture;
use forestalg::proofsearch::{parse_circuit, parse_seeds, rc_verify};
use forestalg::terms::{format_term, parse_term, Term};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Unknown = 4,
    Eval = 5,
    Params = 6,
}

/// An algebra together with its letter assignment.
pub struct FaAlgebra {
    phi: Homomorphism,
}

/// A forest, context, or multicontext.
pub struct FaTerm {
    term: Term,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: FaStatus, msg: impl ToString) -> FaStatus {
    let c = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
    status
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, FaStatus> {
    if p.is_null() {
        return Err(fail(FaStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|e| fail(FaStatus::InvalidUtf8, e))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

unsafe fn put<T>(out: *mut T, v: T) -> FaStatus {
    if out.is_null() {
        return fail(FaStatus::NullPointer, "null output pointer");
    }
    *out = v;
    FaStatus::Ok
}

/// Message of the last failure on this thread. Valid until the next call.
#[no_mangle]
pub extern "C" fn fa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a built-in fixture by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fa_algebra_fixture(name: *const c_char, out: *mut *mut FaAlgebra) -> FaStatus {
    let name = tri!(text(name));
    match fixture(name) {
        Ok(f) => put(out, Box::into_raw(Box::new(FaAlgebra { phi: f.phi }))),
        Err(e) => fail(FaStatus::Unknown, e),
    }
}

/// Parses an algebra in the `.fa` text format.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fa_algebra_parse(src: *const c_char, out: *mut *mut FaAlgebra) -> FaStatus {
    let src = tri!(text(src));
    match parse_algebra(src) {
        Ok(phi) => put(out, Box::into_raw(Box::new(FaAlgebra { phi }))),
        Err(e) => fail(FaStatus::Parse, e),
    }
}

/// # Safety
/// `a` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fa_algebra_free(a: *mut FaAlgebra) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Number of horizontal elements, or 0 for a null handle.
///
/// # Safety
/// `a` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fa_algebra_size(a: *const FaAlgebra) -> usize {
    a.as_ref().map_or(0, |a| a.phi.h().len())
}

/// Name of element `h`, or null when out of range. Free with `fa_string_free`.
///
/// # Safety
/// `a` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fa_element_name(a: *const FaAlgebra, h: usize) -> *mut c_char {
    match a.as_ref() {
        Some(a) if h < a.phi.h().len() => CString::new(a.phi.name(h)).map_or(ptr::null_mut(), CString::into_raw),
        _ => ptr::null_mut(),
    }
}

/// Parses a term. With a non-null `a`, labels are checked against its alphabet.
///
/// # Safety
/// `src` must be a NUL-terminated string, `a` null or a live handle, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fa_term_parse(src: *const c_char, a: *const FaAlgebra, out: *mut *mut FaTerm) -> FaStatus {
    let src = tri!(text(src));
    let alphabet = a.as_ref().map(|a| a.phi.alphabet());
    match parse_term(src, alphabet.as_ref()) {
        Ok(term) => put(out, Box::into_raw(Box::new(FaTerm { term }))),
        Err(e) => fail(FaStatus::Parse, e),
    }
}

/// # Safety
/// `t` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fa_term_free(t: *mut FaTerm) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Canonical text of a term, or null for a null handle. Free with `fa_string_free`.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fa_term_to_string(t: *const FaTerm) -> *mut c_char {
    match t.as_ref() {
        Some(t) => CString::new(format_term(&t.term)).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Image of a forest as an element index.
///
/// # Safety
/// `a` and `t` must be live handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fa_eval(a: *const FaAlgebra, t: *const FaTerm, out: *mut usize) -> FaStatus {
    let (Some(a), Some(t)) = (a.as_ref(), t.as_ref()) else {
        return fail(FaStatus::NullPointer, "null handle");
    };
    match a.phi.eval_h(&t.term) {
        Ok(h) => put(out, h),
        Err(e) => fail(FaStatus::Eval, e),
    }
}

/// Whether the image of a forest is accepting.
///
/// # Safety
/// `a` and `t` must be live handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fa_accepts(a: *const FaAlgebra, t: *const FaTerm, out: *mut bool) -> FaStatus {
    let mut h = 0;
    let st = fa_eval(a, t, &mut h);
    if st != FaStatus::Ok {
        return st;
    }
    put(out, (*a).phi.accepting.contains(&h))
}

/// Decides s ≈ⁿ_{τ,π} t.
///
/// # Safety
/// `s` and `t` must be live handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fa_equiv(
    s: *const FaTerm,
    t: *const FaTerm,
    n: usize,
    tau: usize,
    pi: usize,
    out: *mut bool,
) -> FaStatus {
    let (Some(s), Some(t)) = (s.as_ref(), t.as_ref()) else {
        return fail(FaStatus::NullPointer, "null handle");
    };
    match TauPi::new(tau, pi) {
        Ok(c) => put(out, equiv_n(&s.term, &t.term, n, c)),
        Err(e) => fail(FaStatus::Params, e),
    }
}

/// Checks a circuit and seed family given in the `.fc` and `.fs` formats.
/// `out` is set to whether every condition holds; a violation is not an
/// error, and its description is left in `fa_last_error`.
///
/// # Safety
/// `a` must be a live handle, the strings NUL-terminated, and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fa_rc_verify(
    a: *const FaAlgebra,
    circuit: *const c_char,
    seeds: *const c_char,
    n: usize,
    tau: usize,
    pi: usize,
    out: *mut bool,
) -> FaStatus {
    let Some(a) = a.as_ref() else {
        return fail(FaStatus::NullPointer, "null handle");
    };
    let (circuit, seeds) = (tri!(text(circuit)), tri!(text(seeds)));
    let c = match TauPi::new(tau, pi) {
        Ok(c) => c,
        Err(e) => return fail(FaStatus::Params, e),
    };
    let m = match parse_circuit(circuit, &a.phi) {
        Ok(m) => m,
        Err(e) => return fail(FaStatus::Parse, e),
    };
    let s0 = match parse_seeds(seeds, &a.phi) {
        Ok(s) => s,
        Err(e) => return fail(FaStatus::Parse, e),
    };
    match rc_verify(&a.phi, &m, &s0, n, c) {
        Ok(Ok(())) => put(out, true),
        Ok(Err(v)) => {
            fail(FaStatus::Ok, v);
            put(out, false)
        }
        Err(e) => fail(FaStatus::Eval, e),
    }
}
