// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI for gatefid.
//!
//! Every function returns a [`GfStatus`]; results come back through out
//! pointers. On failure a message is kept per thread and can be copied out
//! with [`gf_last_error_message`]. Handles are opaque and must be released
//! with their `_free` function; passing NULL to a `_free` function is a no-op.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use gatefid::analytic::{assemble_budget, BudgetOptions, FidelityBudget, FirstOrderFormula};
use gatefid::config::load_config;
use gatefid::gatelib::{self, GateModel};
use gatefid::liouville::{channel_tomography, haar_average_fidelity, haar_mc_fidelity, SolverOptions};
use gatefid::propagator::effective_target;
use gatefid::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericalError = 4,
    SolverError = 5,
    IndexOutOfRange = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// First-order formula selector for [`gf_budget_compute`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfFormula {
    Projected = 0,
    HaarExact = 1,
}

/// A gate model together with the current rate of each of its channels.
pub struct GfModel {
    model: GateModel,
    rates: Vec<f64>,
}

/// Per-channel coefficients and the resulting average fidelity.
pub struct GfBudget {
    budget: FidelityBudget,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(err: &Error) -> GfStatus {
    match err {
        Error::Validation(_) | Error::TimeOutOfRange { .. } => GfStatus::InvalidArgument,
        Error::Config { .. } | Error::Io(_) => GfStatus::ConfigError,
        Error::Numerical(_) | Error::Quadrature { .. } => GfStatus::NumericalError,
        Error::Solver(_) => GfStatus::SolverError,
    }
}

fn guard<F>(f: F) -> GfStatus
where
    F: FnOnce() -> Result<(), GfStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            GfStatus::Panic
        }
    }
}

fn check<T>(r: gatefid::Result<T>) -> Result<T, GfStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, GfStatus> {
    p.as_ref().ok_or_else(|| {
        set_error(format!("{name} is NULL"));
        GfStatus::NullPointer
    })
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, GfStatus> {
    p.as_mut().ok_or_else(|| {
        set_error(format!("{name} is NULL"));
        GfStatus::NullPointer
    })
}

unsafe fn put_model(out: *mut *mut GfModel, model: gatefid::Result<GateModel>) -> Result<(), GfStatus> {
    let slot = deref_mut(out, "out")?;
    let model = check(model)?;
    let rates = model.channels.iter().map(|c| c.rate).collect();
    *slot = Box::into_raw(Box::new(GfModel { model, rates }));
    Ok(())
}

/// Copies `text` with a terminating NUL into `buf`. `needed` (optional)
/// receives the required size including the NUL.
unsafe fn copy_out(text: &[u8], buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), GfStatus> {
    if let Some(n) = needed.as_mut() {
        *n = text.len() + 1;
    }
    if buf.is_null() {
        return if len == 0 { Ok(()) } else { Err(GfStatus::NullPointer) };
    }
    if len < text.len() + 1 {
        return Err(GfStatus::BufferTooSmall);
    }
    std::ptr::copy_nonoverlapping(text.as_ptr() as *const c_char, buf, text.len());
    *buf.add(text.len()) = 0;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf`.
#[no_mangle]
pub unsafe extern "C" fn gf_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> GfStatus {
    guard(|| LAST_ERROR.with(|e| copy_out(e.borrow().as_bytes(), buf, len, needed)))
}

/// Transmon CZ with coupling `lambda` (rad/s) applied for `tau` (s).
#[no_mangle]
pub unsafe extern "C" fn gf_model_cz(lambda: f64, tau: f64, out: *mut *mut GfModel) -> GfStatus {
    guard(|| put_model(out, gatelib::transmon_cz(lambda, tau)))
}

/// Rydberg-blockade CZ at Rabi frequency `omega` (rad/s) with the default
/// detuning ratio and laser phase.
#[no_mangle]
pub unsafe extern "C" fn gf_model_rydberg_cz(omega: f64, out: *mut *mut GfModel) -> GfStatus {
    guard(|| put_model(out, gatelib::rydberg_cz_default(omega)))
}

#[no_mangle]
pub unsafe extern "C" fn gf_model_cczs(lambda: f64, phi: f64, out: *mut *mut GfModel) -> GfStatus {
    guard(|| put_model(out, gatelib::cczs(lambda, phi)))
}

#[no_mangle]
pub unsafe extern "C" fn gf_model_iswap(g: f64, tau: f64, out: *mut *mut GfModel) -> GfStatus {
    guard(|| put_model(out, gatelib::iswap(g, tau)))
}

/// Idle register with `n` subsystems of the given level counts.
#[no_mangle]
pub unsafe extern "C" fn gf_model_idle(dims: *const usize, n: usize, tau: f64, out: *mut *mut GfModel) -> GfStatus {
    guard(|| {
        let dims = deref(dims, "dims")?;
        let dims = std::slice::from_raw_parts(dims, n);
        put_model(out, gatelib::idle(dims, tau))
    })
}

/// Two models run simultaneously; neither input is consumed.
#[no_mangle]
pub unsafe extern "C" fn gf_model_parallel(
    a: *const GfModel,
    b: *const GfModel,
    pad: bool,
    out: *mut *mut GfModel,
) -> GfStatus {
    guard(|| {
        let a = deref(a, "a")?;
        let b = deref(b, "b")?;
        let models = [
            GateModel {
                channels: check(a.model.channels_with_rates(&a.rates))?,
                ..a.model.clone()
            },
            GateModel {
                channels: check(b.model.channels_with_rates(&b.rates))?,
                ..b.model.clone()
            },
        ];
        put_model(out, gatelib::parallel(&models, pad))
    })
}

/// Loads a gate and channel rates from a TOML configuration file.
#[no_mangle]
pub unsafe extern "C" fn gf_model_from_config(path: *const c_char, out: *mut *mut GfModel) -> GfStatus {
    guard(|| {
        let path = deref(path, "path")?;
        let path = CStr::from_ptr(path).to_str().map_err(|_| {
            set_error("path is not valid UTF-8");
            GfStatus::InvalidArgument
        })?;
        let cfg = check(load_config(Path::new(path)))?;
        let model = check(cfg.model())?;
        let channels = check(cfg.channels_for(&model))?;
        let model = GateModel { channels, ..model };
        put_model(out, Ok(model))
    })
}

#[no_mangle]
pub unsafe extern "C" fn gf_model_free(model: *mut GfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub unsafe extern "C" fn gf_model_channel_count(model: *const GfModel, out: *mut usize) -> GfStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(model, "model")?.rates.len();
        Ok(())
    })
}

/// Reference time τ of the budget in seconds.
#[no_mangle]
pub unsafe extern "C" fn gf_model_tau(model: *const GfModel, out: *mut f64) -> GfStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(model, "model")?.model.schedule.reference_time();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gf_model_channel_label(
    model: *const GfModel,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> GfStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let ch = m.model.channels.get(index).ok_or_else(|| {
            set_error(format!("channel index {index} out of range"));
            GfStatus::IndexOutOfRange
        })?;
        copy_out(ch.label.as_bytes(), buf, len, needed)
    })
}

/// Sets the rate (s⁻¹) of channel `index`.
#[no_mangle]
pub unsafe extern "C" fn gf_model_set_rate(model: *mut GfModel, index: usize, rate: f64) -> GfStatus {
    guard(|| {
        let m = deref_mut(model, "model")?;
        if !(rate.is_finite() && rate >= 0.0) {
            set_error(format!("rate must be finite and non-negative, got {rate}"));
            return Err(GfStatus::InvalidArgument);
        }
        let slot = m.rates.get_mut(index).ok_or_else(|| {
            set_error(format!("channel index {index} out of range"));
            GfStatus::IndexOutOfRange
        })?;
        *slot = rate;
        Ok(())
    })
}

/// Sets every channel so that Γτ equals `gamma_tau`.
#[no_mangle]
pub unsafe extern "C" fn gf_model_set_gamma_tau(model: *mut GfModel, gamma_tau: f64) -> GfStatus {
    guard(|| {
        let m = deref_mut(model, "model")?;
        if !(gamma_tau.is_finite() && gamma_tau >= 0.0) {
            set_error("gamma_tau must be finite and non-negative");
            return Err(GfStatus::InvalidArgument);
        }
        let rate = gamma_tau / m.model.schedule.reference_time();
        m.rates.iter_mut().for_each(|r| *r = rate);
        Ok(())
    })
}

/// First-order budget. `abs_tol` ≤ 0 selects the default tolerance.
#[no_mangle]
pub unsafe extern "C" fn gf_budget_compute(
    model: *const GfModel,
    formula: GfFormula,
    abs_tol: f64,
    out: *mut *mut GfBudget,
) -> GfStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let slot = deref_mut(out, "out")?;
        let mut opts = BudgetOptions {
            formula: match formula {
                GfFormula::Projected => FirstOrderFormula::Projected,
                GfFormula::HaarExact => FirstOrderFormula::HaarExact,
            },
            ..BudgetOptions::default()
        };
        if abs_tol > 0.0 {
            opts.quadrature.abs_tol = abs_tol;
        }
        let channels = check(m.model.channels_with_rates(&m.rates))?;
        let budget = check(assemble_budget(&m.model.schedule, &channels, &opts))?;
        *slot = Box::into_raw(Box::new(GfBudget { budget }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gf_budget_free(budget: *mut GfBudget) {
    if !budget.is_null() {
        drop(Box::from_raw(budget));
    }
}

#[no_mangle]
pub unsafe extern "C" fn gf_budget_len(budget: *const GfBudget, out: *mut usize) -> GfStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(budget, "budget")?.budget.entries.len();
        Ok(())
    })
}

/// Coefficient c_k and contribution c_k Γ_k τ of entry `index`; either out
/// pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn gf_budget_entry(
    budget: *const GfBudget,
    index: usize,
    coefficient: *mut f64,
    contribution: *mut f64,
) -> GfStatus {
    guard(|| {
        let b = deref(budget, "budget")?;
        let e = b.budget.entries.get(index).ok_or_else(|| {
            set_error(format!("entry index {index} out of range"));
            GfStatus::IndexOutOfRange
        })?;
        if let Some(c) = coefficient.as_mut() {
            *c = e.coefficient;
        }
        if let Some(c) = contribution.as_mut() {
            *c = e.contribution;
        }
        Ok(())
    })
}

/// F̄ = 1 − Σ c_k Γ_k τ.
#[no_mangle]
pub unsafe extern "C" fn gf_budget_fidelity(budget: *const GfBudget, out: *mut f64) -> GfStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(budget, "budget")?.budget.total;
        Ok(())
    })
}

/// Exact average fidelity from the master equation. `solver_tol` ≤ 0
/// selects the default. When `mc_samples` > 0 a Monte Carlo estimate with
/// the given seed is also written to `mc_mean` and `mc_std_error`.
#[no_mangle]
pub unsafe extern "C" fn gf_oracle_fidelity(
    model: *const GfModel,
    solver_tol: f64,
    mc_samples: usize,
    seed: u64,
    fidelity: *mut f64,
    mc_mean: *mut f64,
    mc_std_error: *mut f64,
) -> GfStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let out = deref_mut(fidelity, "fidelity")?;
        let mut opts = SolverOptions::default();
        if solver_tol > 0.0 {
            opts.tol = solver_tol;
        }
        let channels = check(m.model.channels_with_rates(&m.rates))?;
        let tomo = check(channel_tomography(&m.model.schedule, &channels, &opts))?;
        let target = check(effective_target(&m.model.schedule))?;
        *out = check(haar_average_fidelity(&tomo, &target))?;
        if mc_samples > 0 {
            let mc = check(haar_mc_fidelity(&tomo, &target, mc_samples, seed))?;
            if let Some(v) = mc_mean.as_mut() {
                *v = mc.mean;
            }
            if let Some(v) = mc_std_error.as_mut() {
                *v = mc.std_error;
            }
        }
        Ok(())
    })
}
