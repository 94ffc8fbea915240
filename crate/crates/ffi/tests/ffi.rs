// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

use std::ffi::{c_char, CStr, CString};
use std::f64::consts::PI;
use std::ptr;

use gatefid_ffi::*;

fn last_error() -> String {
    let mut needed = 0usize;
    unsafe {
        gf_last_error_message(ptr::null_mut(), 0, &mut needed);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(gf_last_error_message(buf.as_mut_ptr(), buf.len(), ptr::null_mut()), GfStatus::Ok);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn label(model: *const GfModel, i: usize) -> String {
    let mut buf = [0 as c_char; 64];
    unsafe {
        assert_eq!(gf_model_channel_label(model, i, buf.as_mut_ptr(), buf.len(), ptr::null_mut()), GfStatus::Ok);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn cz_budget_through_c_api() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(gf_model_cz(PI, 1.0, &mut model), GfStatus::Ok);
        let mut n = 0;
        assert_eq!(gf_model_channel_count(model, &mut n), GfStatus::Ok);
        assert_eq!(n, 4);
        assert_eq!(label(model, 2), "dephasing_q1");
        assert_eq!(gf_model_set_gamma_tau(model, 1e-3), GfStatus::Ok);

        let mut budget = ptr::null_mut();
        assert_eq!(gf_budget_compute(model, GfFormula::Projected, 0.0, &mut budget), GfStatus::Ok);
        let expected = [0.5, 0.3, 61.0 / 80.0, 29.0 / 80.0];
        let mut len = 0;
        gf_budget_len(budget, &mut len);
        assert_eq!(len, 4);
        for (i, e) in expected.iter().enumerate() {
            let mut c = 0.0;
            let mut contrib = 0.0;
            assert_eq!(gf_budget_entry(budget, i, &mut c, &mut contrib), GfStatus::Ok);
            assert!((c - e).abs() < 1e-9);
            assert!((contrib - e * 1e-3).abs() < 1e-12);
        }
        let mut f = 0.0;
        gf_budget_fidelity(budget, &mut f);
        assert!((f - (1.0 - 1.925e-3)).abs() < 1e-9);
        gf_budget_free(budget);
        gf_model_free(model);
    }
}

#[test]
fn oracle_and_monte_carlo() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(gf_model_cz(PI, 1.0, &mut model), GfStatus::Ok);
        assert_eq!(gf_model_set_rate(model, 0, 1e-3), GfStatus::Ok);
        let (mut f, mut mean, mut se) = (0.0, 0.0, 0.0);
        assert_eq!(gf_oracle_fidelity(model, 0.0, 400, 3, &mut f, &mut mean, &mut se), GfStatus::Ok);
        assert!((f - (1.0 - 0.5e-3)).abs() < 5e-6);
        assert!((mean - f).abs() < 4.0 * se);
        gf_model_free(model);
    }
}

#[test]
fn parallel_and_idle_handles() {
    unsafe {
        let mut cz = ptr::null_mut();
        gf_model_cz(PI, 1.0, &mut cz);
        let dims = [2usize, 2];
        let mut idle = ptr::null_mut();
        assert_eq!(gf_model_idle(dims.as_ptr(), 2, 1.0, &mut idle), GfStatus::Ok);
        let mut par = ptr::null_mut();
        assert_eq!(gf_model_parallel(cz, idle, false, &mut par), GfStatus::Ok);
        let mut n = 0;
        gf_model_channel_count(par, &mut n);
        assert_eq!(n, 8);
        assert_eq!(label(par, 4), "relaxation_q3");
        gf_model_free(par);
        gf_model_free(idle);
        gf_model_free(cz);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(gf_model_cz(-1.0, 1.0, &mut model), GfStatus::InvalidArgument);
        assert!(model.is_null());
        assert!(last_error().contains("lambda"));
        assert_eq!(gf_model_cz(PI, 1.0, ptr::null_mut()), GfStatus::NullPointer);

        gf_model_cz(PI, 1.0, &mut model);
        assert_eq!(gf_model_set_rate(model, 9, 1.0), GfStatus::IndexOutOfRange);
        assert_eq!(gf_model_set_rate(model, 0, -1.0), GfStatus::InvalidArgument);
        let mut small = [0 as c_char; 4];
        let mut needed = 0;
        assert_eq!(
            gf_model_channel_label(model, 0, small.as_mut_ptr(), small.len(), &mut needed),
            GfStatus::BufferTooSmall
        );
        assert_eq!(needed, "relaxation_q1".len() + 1);
        gf_model_free(model);
        gf_model_free(ptr::null_mut());
        gf_budget_free(ptr::null_mut());

        let path = CString::new("/nonexistent/config.toml").unwrap();
        assert_eq!(gf_model_from_config(path.as_ptr(), &mut model), GfStatus::ConfigError);
    }
}

#[test]
fn config_file_sets_rates() {
    let dir = std::env::temp_dir().join(format!("gatefid-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cz.toml");
    std::fs::write(
        &path,
        "[gate]\nmodel = \"cz\"\nlambda = \"10 MHz*2pi\"\n[[channels]]\nqubit = 2\nkind = \"relaxation\"\nrate = \"1/(50 us)\"\n",
    )
    .unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(gf_model_from_config(c_path.as_ptr(), &mut model), GfStatus::Ok);
        let mut budget = ptr::null_mut();
        gf_budget_compute(model, GfFormula::Projected, 0.0, &mut budget);
        let mut f = 0.0;
        gf_budget_fidelity(budget, &mut f);
        assert!((f - (1.0 - 0.3e-3)).abs() < 1e-12);
        gf_budget_free(budget);
        gf_model_free(model);
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/gatefid.h");
    for name in [
        "gf_version",
        "gf_last_error_message",
        "gf_model_cz",
        "gf_model_from_config",
        "gf_budget_compute",
        "gf_oracle_fidelity",
        "GF_STATUS_OK = 0",
        "typedef struct GfModel GfModel;",
    ] {
        assert!(header.contains(name), "{name}");
    }
    let v = unsafe { CStr::from_ptr(gf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
