use std::ffi::CStr;
use std::ptr;

use blockamc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(bamc_last_error()) }.to_string_lossy().into_owned()
}

fn options(depth: u32) -> BamcSolveOptions {
    let mut o = std::mem::MaybeUninit::uninit();
    assert_eq!(unsafe { bamc_solve_options_default(o.as_mut_ptr()) }, BamcStatus::Ok);
    let mut o = unsafe { o.assume_init() };
    o.depth = depth;
    o.sigma_rel = 0.0;
    o
}

#[test]
fn matrix_round_trip() {
    let data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(bamc_matrix_new(2, 3, data.as_ptr(), &mut m), BamcStatus::Ok);
        assert_eq!((bamc_matrix_rows(m), bamc_matrix_cols(m)), (2, 3));
        let mut out = [0.0; 6];
        assert_eq!(bamc_matrix_copy(m, out.as_mut_ptr(), 6), BamcStatus::Ok);
        assert_eq!(out, data);
        assert_eq!(bamc_matrix_copy(m, out.as_mut_ptr(), 5), BamcStatus::InvalidArgument);
        bamc_matrix_free(m);
    }
}

#[test]
fn noise_free_solve_matches_direct() {
    let n = 16;
    let mut a = ptr::null_mut();
    let mut b = vec![0.0; n];
    let mut x = vec![0.0; n];
    unsafe {
        assert_eq!(bamc_matrix_generate(BAMC_KIND_WISHART, n, 3, &mut a), BamcStatus::Ok);
        assert_eq!(bamc_rhs_generate(n, 4, b.as_mut_ptr()), BamcStatus::Ok);
        assert_eq!(bamc_direct_solve(a, b.as_ptr(), n, x.as_mut_ptr()), BamcStatus::Ok);
        for depth in 0..=2 {
            let opts = options(depth);
            let mut r = ptr::null_mut();
            assert_eq!(bamc_solve(a, b.as_ptr(), n, &opts, &mut r), BamcStatus::Ok, "{}", last_error());
            assert_eq!(bamc_report_len(r), n);
            let mut xh = vec![0.0; n];
            assert_eq!(bamc_report_solution(r, xh.as_mut_ptr(), n), BamcStatus::Ok);
            let mut e = f64::NAN;
            assert_eq!(bamc_relative_error(x.as_ptr(), xh.as_ptr(), n, &mut e), BamcStatus::Ok);
            assert!(e <= 1e-8, "depth {depth}: {e}");
            assert!((bamc_report_relative_error(r) - e).abs() <= 1e-12);

            let mut s = ptr::null_mut();
            assert_eq!(bamc_report_json(r, &mut s), BamcStatus::Ok);
            let json: serde_json::Value = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
            assert_eq!(json["n"], n);
            bamc_string_free(s);
            bamc_report_free(r);
        }
        bamc_matrix_free(a);
    }
}

#[test]
fn null_options_use_defaults() {
    let data = [2.0, 0.0, 0.0, 4.0];
    let b = [1.0, 1.0];
    unsafe {
        let mut a = ptr::null_mut();
        bamc_matrix_new(2, 2, data.as_ptr(), &mut a);
        let mut r = ptr::null_mut();
        assert_eq!(bamc_solve(a, b.as_ptr(), 2, ptr::null(), &mut r), BamcStatus::Ok);
        assert!(bamc_report_relative_error(r).is_finite());
        bamc_report_free(r);
        bamc_matrix_free(a);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(bamc_matrix_new(2, 2, ptr::null(), &mut a), BamcStatus::NullPointer);
        assert!(last_error().contains("data"));
        assert_eq!(bamc_matrix_generate(99, 4, 0, &mut a), BamcStatus::InvalidArgument);
        assert!(last_error().contains("kind"));

        let rect = [1.0; 6];
        assert_eq!(bamc_matrix_new(2, 3, rect.as_ptr(), &mut a), BamcStatus::Ok);
        let b = [1.0, 1.0];
        let mut r = ptr::null_mut();
        assert_eq!(bamc_solve(a, b.as_ptr(), 2, ptr::null(), &mut r), BamcStatus::Dimension);
        assert!(r.is_null());
        bamc_matrix_free(a);

        let mut big = ptr::null_mut();
        bamc_matrix_generate(BAMC_KIND_WISHART, 8, 1, &mut big);
        let mut opts = options(0);
        opts.array_max = 4;
        let b = [1.0; 8];
        assert_eq!(bamc_solve(big, b.as_ptr(), 8, &opts, &mut r), BamcStatus::ArrayTooLarge);
        opts.engine = 7;
        assert_eq!(bamc_solve(big, b.as_ptr(), 8, &opts, &mut r), BamcStatus::InvalidArgument);
        bamc_matrix_free(big);

        let data = [0.0; 4];
        let mut z = ptr::null_mut();
        bamc_matrix_new(2, 2, data.as_ptr(), &mut z);
        assert_eq!(bamc_solve(z, b.as_ptr(), 2, &options(0), &mut r), BamcStatus::Singular);
        assert!(!last_error().is_empty());
        bamc_matrix_free(z);

        assert_eq!(bamc_solve_options_default(ptr::null_mut()), BamcStatus::NullPointer);
        let mut ok = std::mem::MaybeUninit::uninit();
        assert_eq!(bamc_solve_options_default(ok.as_mut_ptr()), BamcStatus::Ok);
        assert!(last_error().is_empty());
    }
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        bamc_matrix_free(ptr::null_mut());
        bamc_report_free(ptr::null_mut());
        bamc_string_free(ptr::null_mut());
        assert_eq!(bamc_matrix_rows(ptr::null()), 0);
        assert_eq!(bamc_report_len(ptr::null()), 0);
        assert!(bamc_report_relative_error(ptr::null()).is_nan());
        let mut out = [0.0; 1];
        assert_eq!(bamc_report_solution(ptr::null(), out.as_mut_ptr(), 1), BamcStatus::NullPointer);
    }
}

#[test]
fn cost_json_lists_every_solver() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(bamc_cost_json(512, 0, &mut s), BamcStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
        bamc_string_free(s);
        let solvers: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["solver"].as_str().unwrap()).collect();
        assert_eq!(solvers, ["original", "one_stage", "two_stage"]);
        assert_eq!(bamc_cost_json(0, 0, &mut s), BamcStatus::InvalidArgument);
    }
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(bamc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/blockamc.h");
    for sym in ["bamc_solve(", "bamc_matrix_new(", "bamc_last_error(", "typedef struct BamcMatrix BamcMatrix", "BAMC_STATUS_PANIC"] {
        assert!(header.contains(sym), "{sym}");
    }
}
