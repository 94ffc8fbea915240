// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Small-denominator rational hints for printed coefficients.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const MAX_DENOMINATOR: u64 = 1000;
pub const HINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub numer: i64,
    pub denom: u64,
}

impl Rational {
    pub fn value(&self) -> f64 {
        self.numer as f64 / self.denom as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom == 1 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom)
        }
    }
}

/// The smallest-denominator p/q with q ≤ 1000 and |x − p/q| ≤ 1e-9.
pub fn rational_hint(x: f64) -> Option<Rational> {
    rational_hint_with(x, MAX_DENOMINATOR, HINT_TOL)
}

pub fn rational_hint_with(x: f64, max_denom: u64, tol: f64) -> Option<Rational> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    (1..=max_denom).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() <= tol).then_some(Rational {
            numer: p as i64,
            denom: q,
        })
    })
}

/// `≈ p/q` when a hint exists.
pub fn hint_text(x: f64) -> Option<String> {
    rational_hint(x).map(|r| format!("≈ {r}"))
}
