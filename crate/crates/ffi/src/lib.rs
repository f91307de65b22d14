//! C interface to `preperlab`.
//!
//! Every fallible call returns a [`PlStatus`]; on failure the message is
//! available from [`pl_last_error`] on the same thread. Strings handed out by
//! this library must be released with [`pl_string_free`], handles with their
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use preperlab::dynamics::{find_preperiodic, Portrait, UnicriticalMap};
use preperlab::exactnum::BigRat;
use preperlab::geometry::geometry_report;
use preperlab::heights::{hexagon_scan, triple_scan, ScanOptions};
use preperlab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Precondition = 4,
    OutOfRange = 5,
    Computation = 6,
    Panic = 7,
}

/// Opaque handle for a map `z^d + c`.
pub struct PlMap {
    map: UnicriticalMap,
}

/// Opaque handle for the preperiodic portrait of a map.
pub struct PlPortrait {
    portrait: Portrait,
    strings: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PlStatus {
    match e {
        Error::Parse(_) | Error::InvalidDegree(_) | Error::InvalidWeights(_) | Error::NotPrime(_) => PlStatus::Parse,
        Error::Precondition(_) | Error::TooFewPoints { .. } | Error::UnsupportedRootOfUnity(_) | Error::HeightZero => {
            PlStatus::Precondition
        }
        _ => PlStatus::Computation,
    }
}

fn fail(status: PlStatus, msg: impl Into<String>) -> PlStatus {
    set_error(msg.into());
    status
}

/// Runs `body`, turning library errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (PlStatus, String)>) -> PlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PlStatus::Ok,
        Ok(Err((s, m))) => fail(s, m),
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PlStatus::Panic, msg)
        }
    }
}

fn lib(e: Error) -> (PlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PlStatus, String) {
    (PlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (PlStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (PlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates the map `z^d + c` with `c` given as `"a/b"`.
///
/// # Safety
/// `c` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_map_new(d: u32, c: *const c_char, out: *mut *mut PlMap) -> PlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c: BigRat = read_str(c, "c")?.parse().map_err(lib)?;
        let map = UnicriticalMap::new(d, c).map_err(lib)?;
        *out = Box::into_raw(Box::new(PlMap { map }));
        Ok(())
    })
}

/// # Safety
/// `map` must be NULL or a handle from [`pl_map_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pl_map_free(map: *mut PlMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Naive logarithmic height `h(c)`.
///
/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_map_height(map: *const PlMap, out: *mut f64) -> PlStatus {
    guard(|| {
        let map = map.as_ref().ok_or_else(|| null("map"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = map.map.h_c();
        Ok(())
    })
}

/// Computes every rational preperiodic point of `map`.
///
/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_portrait_compute(map: *const PlMap, out: *mut *mut PlPortrait) -> PlStatus {
    guard(|| {
        let map = map.as_ref().ok_or_else(|| null("map"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let portrait = find_preperiodic(&map.map);
        let strings = portrait
            .points()
            .iter()
            .map(|p| CString::new(p.z.to_string()).expect("no NUL in a rational"))
            .collect();
        *out = Box::into_raw(Box::new(PlPortrait { portrait, strings }));
        Ok(())
    })
}

/// # Safety
/// `portrait` must be NULL or a handle from [`pl_portrait_compute`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pl_portrait_free(portrait: *mut PlPortrait) {
    if !portrait.is_null() {
        drop(Box::from_raw(portrait));
    }
}

/// Number of points in the portrait; 0 for a NULL handle.
///
/// # Safety
/// `portrait` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pl_portrait_len(portrait: *const PlPortrait) -> usize {
    portrait.as_ref().map_or(0, |p| p.portrait.len())
}

/// Point `i` as `"a/b"` with its tail length and period. The string is owned
/// by the portrait and lives as long as the handle.
///
/// # Safety
/// `portrait` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pl_portrait_point(
    portrait: *const PlPortrait,
    i: usize,
    z: *mut *const c_char,
    tail: *mut u32,
    period: *mut u32,
) -> PlStatus {
    guard(|| {
        let p = portrait.as_ref().ok_or_else(|| null("portrait"))?;
        if z.is_null() || tail.is_null() || period.is_null() {
            return Err(null("output pointer"));
        }
        let pt = p.portrait.points().get(i).ok_or_else(|| {
            (
                PlStatus::OutOfRange,
                format!("index {i} out of range for {} points", p.portrait.len()),
            )
        })?;
        *z = p.strings[i].as_ptr();
        *tail = pt.tail as u32;
        *period = pt.period as u32;
        Ok(())
    })
}

unsafe fn write_json(out: *mut *mut c_char, v: serde_json::Value) -> Result<(), (PlStatus, String)> {
    *out = into_c_string(serde_json::to_string(&v).map_err(|e| lib(e.into()))?);
    Ok(())
}

/// Portrait as a JSON document; free with [`pl_string_free`].
///
/// # Safety
/// `portrait` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_portrait_json(portrait: *const PlPortrait, out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        let p = portrait.as_ref().ok_or_else(|| null("portrait"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        write_json(out, p.portrait.to_json())
    })
}

/// Disk-tree geometry report at the bad prime `p ∤ d` as JSON.
///
/// # Safety
/// `portrait` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_geometry_json(
    portrait: *const PlPortrait,
    p: u64,
    eps: f64,
    max_level: u32,
    out: *mut *mut c_char,
) -> PlStatus {
    guard(|| {
        let pp = portrait.as_ref().ok_or_else(|| null("portrait"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = UnicriticalMap::new(pp.portrait.degree(), pp.portrait.c().clone()).map_err(lib)?;
        let r = geometry_report(&f, &pp.portrait.values(), p, eps, max_level).map_err(lib)?;
        write_json(out, serde_json::to_value(&r).map_err(|e| lib(e.into()))?)
    })
}

/// Ranked hexagons (`kind = 0`) or periodic abc triples (`kind = 1`) as JSON.
///
/// # Safety
/// `map` and `portrait` must be live handles for the same map and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_tuple_scan_json(
    map: *const PlMap,
    portrait: *const PlPortrait,
    kind: u32,
    budget: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> PlStatus {
    guard(|| {
        let f = &map.as_ref().ok_or_else(|| null("map"))?.map;
        let pp = &portrait.as_ref().ok_or_else(|| null("portrait"))?.portrait;
        if out.is_null() {
            return Err(null("out"));
        }
        if pp.degree() != f.degree() || pp.c() != f.c() {
            return Err((PlStatus::Precondition, "portrait belongs to a different map".into()));
        }
        let opts = ScanOptions {
            budget,
            seed,
            ..ScanOptions::default()
        };
        let scan = match kind {
            0 => hexagon_scan(f, pp, &opts),
            1 => triple_scan(f, pp, &opts),
            k => return Err((PlStatus::OutOfRange, format!("unknown tuple kind {k}"))),
        }
        .map_err(lib)?;
        write_json(out, serde_json::to_value(&scan).map_err(|e| lib(e.into()))?)
    })
}
