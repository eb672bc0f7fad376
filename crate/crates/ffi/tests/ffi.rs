use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use morrey_bilinear_ffi::*;

fn ones(depth: u32) -> *mut MbFunction {
    let v = vec![1.0; 1 << depth];
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { mb_function_new(1, depth, v.as_ptr(), v.len(), &mut f) }, MbStatus::Ok);
    f
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        mb_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn bilinear_integral_through_handles() {
    let f = ones(7);
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(mb_b_alpha(f, f, 0.5, &mut b), MbStatus::Ok);
        let n = mb_function_len(b);
        assert_eq!(n, 128);
        let mut v = vec![0.0; n];
        assert_eq!(mb_function_values(b, v.as_mut_ptr(), n), MbStatus::Ok);
        let mid = 0.5 * (v[63] + v[64]);
        assert!((mid - 8f64.sqrt()).abs() < 0.02 * 8f64.sqrt(), "{mid}");
        mb_function_free(b);
        mb_function_free(f);
    }
}

#[test]
fn norms_of_the_constant_function() {
    let f = ones(5);
    let (mut m, mut l) = (0.0, 0.0);
    unsafe {
        assert_eq!(mb_morrey_norm(f, 2.0, 1.0, MbFamily::AllAligned, &mut m), MbStatus::Ok);
        assert_eq!(mb_lebesgue_norm(f, 3.0, &mut l), MbStatus::Ok);
        mb_function_free(f);
    }
    assert!((m - 1.0).abs() < 1e-12);
    assert!((l - 1.0).abs() < 1e-12);
}

#[test]
fn errors_map_to_status_codes() {
    let f = ones(4);
    let mut out = ptr::null_mut();
    let mut x = 0.0;
    unsafe {
        assert_eq!(mb_function_new(1, 4, [1.0].as_ptr(), 1, &mut out), MbStatus::InvalidParameter);
        assert!(last_error().contains("expected 16 values"));
        assert!(out.is_null());
        assert_eq!(mb_b_alpha(f, ptr::null(), 0.5, &mut out), MbStatus::NullPointer);
        assert_eq!(mb_morrey_norm(f, 1.0, 2.0, MbFamily::Dyadic, &mut x), MbStatus::InvalidParameter);
        let g = ones(5);
        assert_eq!(mb_b_alpha(f, g, 0.5, &mut out), MbStatus::GridMismatch);
        let missing = CString::new("/nonexistent/f.mgf").unwrap();
        assert_eq!(mb_function_read_mgf(missing.as_ptr(), &mut out), MbStatus::Io);
        assert_eq!(CStr::from_ptr(mb_status_name(MbStatus::GridMismatch)).to_str().unwrap(), "grid mismatch");
        assert_eq!(mb_function_len(ptr::null()), 0);
        mb_function_free(g);
        mb_function_free(f);
        mb_function_free(ptr::null_mut());
    }
}

#[test]
fn mgf_round_trip_and_characteristic() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("w.mgf").to_str().unwrap()).unwrap();
    let w = ones(4);
    let mut back = ptr::null_mut();
    let mut ws = ptr::null_mut();
    let mut c = 0.0;
    unsafe {
        assert_eq!(mb_function_write_mgf(w, path.as_ptr()), MbStatus::Ok);
        assert_eq!(mb_function_read_mgf(path.as_ptr(), &mut back), MbStatus::Ok);
        assert_eq!(mb_function_len(back), 16);
        assert_eq!(mb_weights_new(w, back, w, &mut ws), MbStatus::Ok);
        let st = mb_char_two_weight(ws, 0.5, 1.2, 1.2, 0.625, 5.0 / 7.0, 24.0 / 35.0, 10.0 / 3.0, 1.02, MbFamily::Dyadic, &mut c);
        assert_eq!(st, MbStatus::Ok, "{}", last_error());
        let st = mb_char_two_weight(ws, 0.5, 1.2, 1.2, 0.625, 5.0 / 7.0, 0.5, 10.0 / 3.0, 1.02, MbFamily::Dyadic, &mut c);
        assert_eq!(st, MbStatus::Hypothesis);
        mb_weights_free(ws);
        mb_function_free(back);
        mb_function_free(w);
    }
    assert!(c.is_finite() && c > 0.0);
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/morrey_bilinear.h")).unwrap();
    for name in [
        "mb_function_new",
        "mb_function_read_mgf",
        "mb_function_write_mgf",
        "mb_function_len",
        "mb_function_values",
        "mb_function_free",
        "mb_b_alpha",
        "mb_i_alpha",
        "mb_morrey_norm",
        "mb_lebesgue_norm",
        "mb_weights_new",
        "mb_weights_free",
        "mb_char_two_weight",
        "mb_last_error_message",
        "mb_status_name",
        "typedef struct MbFunction MbFunction",
        "MB_STATUS_GRID_MISMATCH = 5",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

/// Compiles and runs a small C program against the static library when a C
/// compiler is on the path.
#[test]
fn c_program_links_against_the_static_library() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libmorrey_bilinear_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi_smoke");
    let st = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(st.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("expected 64 values"));
}
