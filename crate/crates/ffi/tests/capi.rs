use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sobolev_growth_ffi::*;

fn last_error() -> String {
    let p = sg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn gamma_and_null_pointers() {
    let mut g = 0.0;
    assert_eq!(unsafe { sg_gamma_sqrt2(1, &mut g) }, SgStatus::Ok);
    assert!((g - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    assert_eq!(unsafe { sg_gamma_sqrt2(1, ptr::null_mut()) }, SgStatus::NullPointer);
    assert!(last_error().contains("out"));
}

#[test]
fn wave_channel_round_trip() {
    let mut ch = ptr::null_mut();
    assert_eq!(unsafe { sg_channel_new_wave(2, 1.0, 0.01, &mut ch) }, SgStatus::Ok);
    let (mut t0, mut lo, mut hi) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { sg_channel_t0(ch, &mut t0) }, SgStatus::Ok);
    assert_eq!(unsafe { sg_channel_bounds(ch, &mut lo, &mut hi, ptr::null_mut()) }, SgStatus::Ok);
    // 2 (atanh(sqrt(2)/2) - atanh(sqrt(2 eps)))
    let expected = 2.0 * ((0.5f64).sqrt().atanh() - (0.02f64).sqrt().atanh());
    assert!((t0 - expected).abs() < 1e-8, "{t0}");
    assert!(lo <= t0 && t0 < hi);

    let mut count = 0usize;
    let mut small = [0.0; 1];
    assert_eq!(
        unsafe { sg_channel_final_actions(ch, small.as_mut_ptr(), 1, &mut count) },
        SgStatus::InvalidArgument
    );
    assert_eq!(count, 2);
    let mut buf = [0.0; 2];
    assert_eq!(unsafe { sg_channel_final_actions(ch, buf.as_mut_ptr(), 2, &mut count) }, SgStatus::Ok);
    assert!((buf[1] - 0.25).abs() < 1e-8);
    unsafe { sg_channel_free(ch) };
    unsafe { sg_channel_free(ptr::null_mut()) };
}

#[test]
fn invalid_channel_sets_error() {
    let mut ch = ptr::null_mut();
    assert_eq!(unsafe { sg_channel_new_wave(3, 1.0, 0.01, &mut ch) }, SgStatus::InvalidArgument);
    assert!(ch.is_null());
    assert!(!last_error().is_empty());
    let k = [1i64, -1, 2, 12];
    assert_eq!(unsafe { sg_channel_new_nls(k.as_ptr(), 1.0, 0.01, &mut ch) }, SgStatus::Ok);
    let mut t0 = 0.0;
    assert_eq!(unsafe { sg_channel_t0(ch, &mut t0) }, SgStatus::Ok);
    assert!(t0 > 0.0 && t0 <= 6.0);
    unsafe { sg_channel_free(ch) };
}

#[test]
fn constants_struct() {
    let mut k = SgConstants::default();
    assert_eq!(unsafe { sg_constants_evaluate(4, 0.5, 0.0, &mut k) }, SgStatus::Ok);
    assert_eq!(k.a, 98304.0);
    assert!((k.log_c1 - 7_372_800f64.ln()).abs() < 1e-12);
    assert_eq!(unsafe { sg_constants_evaluate(8, 0.5, 0.0, &mut k) }, SgStatus::Ok);
    assert!(k.b.is_nan() && k.log_mu0.is_nan());
    assert_eq!(unsafe { sg_constants_evaluate(5, 0.5, 0.0, &mut k) }, SgStatus::InvalidArgument);
}

#[test]
fn experiment_report_json() {
    let cfg = CString::new(
        "equation = \"wave\"\np = 2\ns = 3.0\nmu = 10.0\nepsilon = 1e-3\nj_max = 8\ndt = 0.01\nsample_stride = 50\n",
    )
    .unwrap();
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { sg_experiment_run(cfg.as_ptr(), &mut report) }, SgStatus::Ok);
    let mut ratio = 0.0;
    assert_eq!(unsafe { sg_report_ratio(report, &mut ratio) }, SgStatus::Ok);
    assert!(ratio > 1.0);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { sg_report_to_json(report, &mut json) }, SgStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["norms"]["ratio"].as_f64().unwrap(), ratio);
    unsafe {
        sg_string_free(json);
        sg_report_free(report);
    }

    let bad = CString::new("equation = \"wave\"\n").unwrap();
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { sg_experiment_run(bad.as_ptr(), &mut report) }, SgStatus::InvalidArgument);
    assert!(last_error().contains("config"));
    assert_eq!(unsafe { sg_experiment_run(ptr::null(), &mut report) }, SgStatus::NullPointer);
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(sg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/sobolev_growth.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "SG_STATUS_OK = 0",
        "typedef struct SgChannel SgChannel",
        "sg_gamma_sqrt2(",
        "sg_channel_new_wave(",
        "sg_channel_t0(",
        "sg_channel_bounds(",
        "sg_channel_free(",
        "sg_constants_evaluate(",
        "sg_experiment_run(",
        "sg_report_ratio(",
        "sg_report_to_json(",
        "sg_string_free(",
        "sg_last_error(",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

/// Compiles and runs a C program against the static library when a C
/// compiler is on the path.
#[test]
fn c_program_links_and_runs() {
    let Ok(out) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success());
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libsobolev_growth_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <math.h>
#include <stdio.h>
#include "sobolev_growth.h"
int main(void) {
    double g = 0.0, t0 = 0.0;
    SgChannel *ch = NULL;
    if (sg_gamma_sqrt2(10000, &g) != SG_STATUS_OK) return 1;
    if (fabs(g - 0.3431457505076194) > 1e-12) return 2;
    if (sg_channel_new_wave(2, 1.0, 0.01, &ch) != SG_STATUS_OK) return 3;
    if (sg_channel_t0(ch, &t0) != SG_STATUS_OK) return 4;
    sg_channel_free(ch);
    if (sg_channel_new_wave(3, 1.0, 0.01, &ch) != SG_STATUS_INVALID_ARGUMENT) return 5;
    if (sg_last_error() == NULL) return 6;
    printf("%.9f\n", t0);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let t0: f64 = String::from_utf8(run.stdout).unwrap().trim().parse().unwrap();
    assert!((t0 - 1.477995888).abs() < 1e-8, "{t0}");
}
