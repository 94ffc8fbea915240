// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! First-order average gate fidelity of multi-qubit gates under Markovian
//! decoherence, with an exact Lindblad reference solver.
//!
//! A gate is a [`propagator::HamiltonianSchedule`] on a
//! [`hilbert::SystemLayout`]; noise is a list of [`analytic::NoiseChannel`]s.
//! [`analytic::assemble_budget`] returns the per-channel coefficients c_k of
//! F̄ ≈ 1 − Σ c_k Γ_k τ, and [`liouville`] computes F̄ exactly for comparison.
//!
//! ```
//! use std::f64::consts::PI;
//! use gatefid::analytic::{assemble_budget, BudgetOptions};
//! use gatefid::gatelib::transmon_cz;
//!
//! let cz = transmon_cz(PI, 1.0).unwrap();
//! let channels = cz.channels_at_gamma_tau(1e-3).unwrap();
//! let budget = assemble_budget(&cz.schedule, &channels, &BudgetOptions::default()).unwrap();
//! assert!((budget.coefficients()[0] - 0.5).abs() < 1e-9);
//! ```

pub mod analytic;
pub mod cli;
pub mod config;
pub mod error;
pub mod gatelib;
pub mod hilbert;
pub mod linalg;
pub mod liouville;
pub mod matrix_file;
pub mod propagator;
pub mod rational;
pub mod report;
pub mod units;

pub use error::{Error, Result};
