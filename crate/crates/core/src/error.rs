// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A structural precondition on an input failed (shapes, indices, levels).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("time {t} s outside schedule range [0, {tau}] s")]
    TimeOutOfRange { t: f64, tau: f64 },

    /// A quantity that must be real or bounded by construction was not.
    #[error("numerical consistency error: {0}")]
    Numerical(String),

    #[error("quadrature did not converge: estimate {estimate:e} > tolerance {tol:e}")]
    Quadrature { estimate: f64, tol: f64 },

    #[error("master-equation solver failed: {0}")]
    Solver(String),

    #[error("configuration error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            location: location.into(),
            message: message.into(),
        }
    }
}
