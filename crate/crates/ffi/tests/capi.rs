use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use preperlab_ffi::*;

fn last_error() -> String {
    let p = pl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn new_map(d: u32, c: &str) -> Result<*mut PlMap, (PlStatus, String)> {
    let c = CString::new(c).unwrap();
    let mut out = ptr::null_mut();
    match unsafe { pl_map_new(d, c.as_ptr(), &mut out) } {
        PlStatus::Ok => Ok(out),
        s => Err((s, last_error())),
    }
}

fn take_string(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { pl_string_free(s) };
    out
}

#[test]
fn portrait_roundtrip() {
    let map = new_map(2, "-29/16").unwrap();
    let mut h = 0.0;
    assert_eq!(unsafe { pl_map_height(map, &mut h) }, PlStatus::Ok);
    assert!((h - 29f64.ln()).abs() < 1e-12);

    let mut portrait = ptr::null_mut();
    assert_eq!(unsafe { pl_portrait_compute(map, &mut portrait) }, PlStatus::Ok);
    let n = unsafe { pl_portrait_len(portrait) };
    assert_eq!(n, 8);

    let mut seen = Vec::new();
    for i in 0..n {
        let (mut z, mut tail, mut period) = (ptr::null(), 0u32, 0u32);
        assert_eq!(
            unsafe { pl_portrait_point(portrait, i, &mut z, &mut tail, &mut period) },
            PlStatus::Ok
        );
        seen.push((unsafe { CStr::from_ptr(z) }.to_str().unwrap().to_owned(), tail, period));
    }
    assert!(seen.contains(&("-7/4".into(), 0, 3)));
    assert!(seen.iter().all(|&(_, _, p)| p == 3));

    let (mut z, mut tail, mut period) = (ptr::null(), 0u32, 0u32);
    assert_eq!(
        unsafe { pl_portrait_point(portrait, n, &mut z, &mut tail, &mut period) },
        PlStatus::OutOfRange
    );

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { pl_portrait_json(portrait, &mut json) }, PlStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 8);

    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { pl_tuple_scan_json(map, portrait, 1, 1000, 0, &mut json) },
        PlStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(v["candidates"], 3);

    unsafe {
        pl_portrait_free(portrait);
        pl_map_free(map);
    }
}

#[test]
fn geometry_and_refusals() {
    let map = new_map(2, "-29/16").unwrap();
    let mut portrait = ptr::null_mut();
    assert_eq!(unsafe { pl_portrait_compute(map, &mut portrait) }, PlStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { pl_geometry_json(portrait, 2, 0.5, 3, &mut json) },
        PlStatus::Precondition
    );
    assert!(json.is_null());
    assert!(last_error().contains("divides d"));
    unsafe {
        pl_portrait_free(portrait);
        pl_map_free(map);
    }

    let map = new_map(2, "6/25").unwrap();
    let mut portrait = ptr::null_mut();
    assert_eq!(unsafe { pl_portrait_compute(map, &mut portrait) }, PlStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { pl_geometry_json(portrait, 5, 0.5, 2, &mut json) },
        PlStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(v["p"], 5);
    unsafe {
        pl_portrait_free(portrait);
        pl_map_free(map);
    }
}

#[test]
fn errors_are_reported() {
    assert_eq!(new_map(1, "1/4").unwrap_err().0, PlStatus::Parse);
    let (s, msg) = new_map(2, "1/0").unwrap_err();
    assert_eq!(s, PlStatus::Parse);
    assert!(!msg.is_empty());
    assert_eq!(
        unsafe { pl_map_new(2, ptr::null(), &mut ptr::null_mut()) },
        PlStatus::NullPointer
    );
    let bad = [0xffu8, 0];
    assert_eq!(
        unsafe { pl_map_new(2, bad.as_ptr().cast(), &mut ptr::null_mut()) },
        PlStatus::InvalidUtf8
    );
    let mut h = 0.0;
    assert_eq!(unsafe { pl_map_height(ptr::null(), &mut h) }, PlStatus::NullPointer);
    assert_eq!(unsafe { pl_portrait_len(ptr::null()) }, 0);
    // A successful call clears the previous message.
    let map = new_map(2, "0").unwrap();
    assert!(pl_last_error().is_null());
    unsafe {
        pl_map_free(map);
        pl_map_free(ptr::null_mut());
        pl_portrait_free(ptr::null_mut());
        pl_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/preperlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "pl_map_new",
        "pl_map_free",
        "pl_portrait_compute",
        "pl_portrait_point",
        "pl_geometry_json",
        "pl_tuple_scan_json",
        "pl_last_error",
        "pl_string_free",
        "PL_STATUS_PRECONDITION",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99", "-Wall", "-Werror"])
        .arg(&header)
        .output()
    else {
        eprintln!("cc not available; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
