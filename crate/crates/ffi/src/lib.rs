//! C ABI for `knotlattice`.
//!
//! Objects are opaque handles created by `kl_*_new`/`kl_*_parse` style
//! constructors and released with the matching `kl_*_free`. Every fallible
//! call returns a [`KlStatus`]; on failure [`kl_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use knotlattice::plumbing::{determinant, parse_graph, PlumbingGraph};
use knotlattice::reduction::{ar_line, FilteredLine};
use knotlattice::surgery::{verify_surgery, xki, KnotFamily};
use knotlattice::{Error, Q};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlStatus {
    Ok = 0,
    /// Malformed or unsupported input.
    InputError = 1,
    /// A computation failed (certificate, size limit, ...).
    ComputationError = 2,
    NullPointer = 3,
    /// A Rust panic was caught at the boundary.
    Internal = 4,
}

/// Exact rational number `num/den` with `den > 0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KlRational {
    pub num: i64,
    pub den: i64,
}

impl From<Q> for KlRational {
    fn from(x: Q) -> Self {
        KlRational { num: *x.numer(), den: *x.denom() }
    }
}

/// A plumbing graph.
pub struct KlGraph(PlumbingGraph);

/// A filtered line model of a knot.
pub struct KlLine(FilteredLine);

/// Knot complexes for every Spin^c structure of the ambient manifold.
pub struct KlFamily(KnotFamily);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> KlStatus {
    let status = if e.is_input() { KlStatus::InputError } else { KlStatus::ComputationError };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> KlStatus) -> KlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal error".into());
            KlStatus::Internal
        }
    }
}

fn null() -> KlStatus {
    set_error("null pointer argument".into());
    KlStatus::NullPointer
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a graph in the text or JSON format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_graph_parse(text: *const c_char, out: *mut *mut KlGraph) -> KlStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return null();
        }
        let Ok(s) = CStr::from_ptr(text).to_str() else {
            set_error("graph text is not UTF-8".into());
            return KlStatus::InputError;
        };
        match parse_graph(s) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(KlGraph(g)));
                KlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `g` must come from [`kl_graph_parse`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kl_graph_free(g: *mut KlGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn kl_graph_vertex_count(g: *const KlGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.len())
}

/// Absolute determinant of the intersection form of the weighted vertices,
/// the order of the first homology of the boundary.
///
/// # Safety
/// `g` must be a live graph handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_graph_determinant(g: *const KlGraph, out: *mut i64) -> KlStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), out.is_null()) else { return null() };
        let d = determinant(&g.0.form()).abs();
        match i64::try_from(d) {
            Ok(d) => {
                *out = d;
                KlStatus::Ok
            }
            Err(_) => fail(Error::Computation("determinant overflows 64 bits".into())),
        }
    })
}

/// Compares the surgery formula with the directly built filled graph for
/// graph framing `n`. `passed` receives 1 or 0.
///
/// # Safety
/// `g` must be a live graph handle and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_verify_surgery(g: *const KlGraph, n: i64, passed: *mut i32) -> KlStatus {
    guard(|| {
        let (Some(g), false) = (g.as_ref(), passed.is_null()) else { return null() };
        match verify_surgery(&g.0, n) {
            Ok(r) => {
                *passed = r.passed as i32;
                if let Some(m) = r.first_discrepancy {
                    set_error(m);
                }
                KlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

unsafe fn slice<'a>(p: *const i64, len: usize) -> Option<&'a [i64]> {
    if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

/// Filtered line of the regular fiber of the Brieskorn sphere `Σ(p_1, …, p_len)`.
///
/// # Safety
/// `p` must point to `len` integers and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_line_brieskorn(p: *const i64, len: usize, out: *mut *mut KlLine) -> KlStatus {
    guard(|| {
        let (Some(p), false) = (slice(p, len), out.is_null()) else { return null() };
        match ar_line(p) {
            Ok((l, _)) => {
                *out = Box::into_raw(Box::new(KlLine(l)));
                KlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Keeps only the joint local extrema of the line, in place.
///
/// # Safety
/// `l` must be a live line handle.
#[no_mangle]
pub unsafe extern "C" fn kl_line_simplify(l: *mut KlLine) -> KlStatus {
    guard(|| {
        let Some(l) = l.as_mut() else { return null() };
        let (s, ok) = l.0.simplify();
        if !ok {
            return fail(Error::Computation("line has a step moving the heights in opposite directions".into()));
        }
        l.0 = s;
        KlStatus::Ok
    })
}

/// # Safety
/// `l` must be a live line handle.
#[no_mangle]
pub unsafe extern "C" fn kl_line_len(l: *const KlLine) -> usize {
    l.as_ref().map_or(0, |l| l.0.len())
}

/// Position and both heights of vertex `i`.
///
/// # Safety
/// `l` must be a live line handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kl_line_vertex(
    l: *const KlLine,
    i: usize,
    position: *mut i64,
    h1: *mut KlRational,
    h2: *mut KlRational,
) -> KlStatus {
    guard(|| {
        let Some(l) = l.as_ref() else { return null() };
        if position.is_null() || h1.is_null() || h2.is_null() {
            return null();
        }
        if i >= l.0.len() {
            return fail(Error::Invalid(format!("vertex {i} out of range")));
        }
        *position = l.0.positions[i];
        *h1 = l.0.h1[i].into();
        *h2 = l.0.h2[i].into();
        KlStatus::Ok
    })
}

/// # Safety
/// `l` must come from [`kl_line_brieskorn`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kl_line_free(l: *mut KlLine) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

fn boxed(out: *mut *mut KlFamily, r: knotlattice::Result<KnotFamily>) -> KlStatus {
    match r {
        Ok(f) => {
            unsafe { *out = Box::into_raw(Box::new(KlFamily(f))) };
            KlStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Family of the regular fiber of `Σ(p_1, …, p_len)`.
///
/// # Safety
/// `p` must point to `len` integers and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_family_brieskorn(p: *const i64, len: usize, out: *mut *mut KlFamily) -> KlStatus {
    guard(|| {
        let (Some(p), false) = (slice(p, len), out.is_null()) else { return null() };
        boxed(out, KnotFamily::brieskorn(p))
    })
}

/// Connected sum of two knots.
///
/// # Safety
/// `a` and `b` must be live family handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_family_tensor(a: *const KlFamily, b: *const KlFamily, out: *mut *mut KlFamily) -> KlStatus {
    guard(|| {
        let (Some(a), Some(b), false) = (a.as_ref(), b.as_ref(), out.is_null()) else { return null() };
        boxed(out, Ok(KnotFamily::tensor(&a.0, &b.0)))
    })
}

/// Surgery with Seifert framing `num/den < 0`; the result describes the dual knot.
///
/// # Safety
/// `f` must be a live family handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_family_surgery(
    f: *const KlFamily,
    num: i64,
    den: i64,
    slack: i64,
    out: *mut *mut KlFamily,
) -> KlStatus {
    guard(|| {
        let (Some(f), false) = (f.as_ref(), out.is_null()) else { return null() };
        if den == 0 {
            return fail(Error::Invalid("zero denominator".into()));
        }
        boxed(out, xki(&f.0, Q::new(num, den), slack).map(|s| s.family))
    })
}

/// Number of Spin^c structures.
///
/// # Safety
/// `f` must be a live family handle.
#[no_mangle]
pub unsafe extern "C" fn kl_family_len(f: *const KlFamily) -> usize {
    f.as_ref().map_or(0, |f| f.0.len())
}

/// d-invariant and top Alexander grading (with its rank) of Spin^c structure `i`.
///
/// # Safety
/// `f` must be a live family handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kl_family_invariants(
    f: *const KlFamily,
    i: usize,
    d: *mut KlRational,
    top: *mut KlRational,
    top_rank: *mut usize,
) -> KlStatus {
    guard(|| {
        let Some(f) = f.as_ref() else { return null() };
        if d.is_null() || top.is_null() || top_rank.is_null() {
            return null();
        }
        let Some(x) = f.0.complexes.get(i) else {
            return fail(Error::Invalid(format!("Spin^c structure {i} out of range")));
        };
        let s = knotlattice::surgery::ClassSummary::of(&f.0.labels[i], x);
        let (Some(dv), Some((t, r))) = (s.d, s.top) else {
            return fail(Error::Computation("homology does not have rank one".into()));
        };
        *d = dv.into();
        *top = t.into();
        *top_rank = r;
        KlStatus::Ok
    })
}

/// # Safety
/// `f` must come from a `kl_family_*` constructor and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kl_family_free(f: *mut KlFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}
