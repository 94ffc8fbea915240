// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Parsing of dimensioned quantities. Everything is canonicalised to SI:
//! rates in s⁻¹, couplings in rad/s, times in s.
//!
//! Accepted forms are `<number> <unit>` (whitespace required) and, for rates,
//! `1/(<number> <time unit>)`:
//!
//! ```
//! use gatefid::units::{parse_rate, parse_angular, parse_time};
//! assert_eq!(parse_rate("2e4 s^-1").unwrap(), 2e4);
//! assert!((parse_rate("1/(50 us)").unwrap() - 2e4).abs() < 1e-9);
//! assert!((parse_angular("3.5 MHz*2pi").unwrap() - 2.0 * std::f64::consts::PI * 3.5e6).abs() < 1e-6);
//! assert!((parse_time("50 ns").unwrap() - 50e-9).abs() < 1e-20);
//! ```

use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Rate,
    AngularFrequency,
    Time,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Rate => "rate",
            Dimension::AngularFrequency => "angular frequency",
            Dimension::Time => "time",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitError(pub String);

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UnitError {}

fn normalize(unit: &str) -> String {
    let mut u: String = unit
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .replace(['µ', 'μ'], "u")
        .replace("⁻¹", "^-1")
        .replace(['·', '×'], "*")
        .replace("2π", "2pi")
        .replace('π', "pi");
    if let Some(rest) = u.strip_prefix("1/") {
        u = format!("{rest}^-1");
    } else if let Some(rest) = u.strip_prefix('/') {
        u = format!("{rest}^-1");
    }
    u
}

fn time_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "s" => 1.0,
        "ms" => 1e-3,
        "us" => 1e-6,
        "ns" => 1e-9,
        "ps" => 1e-12,
        _ => return None,
    })
}

fn hz_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        _ => return None,
    })
}

fn unit_scale(unit: &str, dim: Dimension) -> Option<f64> {
    let u = normalize(unit);
    match dim {
        Dimension::Time => time_scale(&u),
        Dimension::Rate => u
            .strip_suffix("^-1")
            .and_then(time_scale)
            .map(|t| 1.0 / t)
            .or_else(|| hz_scale(&u)),
        Dimension::AngularFrequency => {
            if let Some(t) = u.strip_prefix("rad/") {
                return time_scale(t).map(|s| 1.0 / s);
            }
            let hz = u
                .strip_suffix("*2pi")
                .or_else(|| u.strip_prefix("2pi*"))?;
            hz_scale(hz).map(|s| 2.0 * PI * s)
        }
    }
}

fn parse_number(s: &str, text: &str) -> Result<f64, UnitError> {
    let v: f64 = s
        .parse()
        .map_err(|_| UnitError(format!("cannot parse number `{s}` in `{text}`")))?;
    if !v.is_finite() {
        return Err(UnitError(format!("non-finite value in `{text}`")));
    }
    Ok(v)
}

/// Parses `text` as a quantity of the given dimension, returning SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let t = text.trim();
    if dim == Dimension::Rate {
        if let Some(inner) = t.strip_prefix("1/(").and_then(|r| r.strip_suffix(')')) {
            let time = parse_quantity(inner, Dimension::Time)?;
            if time <= 0.0 {
                return Err(UnitError(format!("time in `{text}` must be positive")));
            }
            return Ok(1.0 / time);
        }
    }
    let (num, unit) = t.split_once(char::is_whitespace).ok_or_else(|| {
        UnitError(format!(
            "`{text}` has no unit; {dim} values need one, e.g. {}",
            example(dim)
        ))
    })?;
    let v = parse_number(num, text)?;
    let scale = unit_scale(unit, dim).ok_or_else(|| {
        UnitError(format!(
            "unknown {dim} unit `{}` in `{text}`, e.g. {}",
            unit.trim(),
            example(dim)
        ))
    })?;
    Ok(v * scale)
}

fn example(dim: Dimension) -> &'static str {
    match dim {
        Dimension::Rate => "`2e4 s^-1`, `0.02 us^-1` or `1/(50 us)`",
        Dimension::AngularFrequency => "`3.5 MHz*2pi` or `2.2e7 rad/s`",
        Dimension::Time => "`50 ns`",
    }
}

pub fn parse_rate(text: &str) -> Result<f64, UnitError> {
    parse_quantity(text, Dimension::Rate)
}

pub fn parse_angular(text: &str) -> Result<f64, UnitError> {
    parse_quantity(text, Dimension::AngularFrequency)
}

pub fn parse_time(text: &str) -> Result<f64, UnitError> {
    parse_quantity(text, Dimension::Time)
}

/// Canonical text for an SI value; parses back to the identical f64.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    match dim {
        Dimension::Rate => format!("{value:?} s^-1"),
        Dimension::AngularFrequency => format!("{value:?} rad/s"),
        Dimension::Time => format!("{value:?} s"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_forms() {
        for s in ["20000 s^-1", "2e4 1/s", "2e4 /s", "0.02 us^-1", "0.02 µs⁻¹", "20 kHz", "1/(50 us)"] {
            assert!((parse_rate(s).unwrap() - 2e4).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn angular_forms() {
        let w = 2.0 * PI * 3.5e6;
        for s in ["3.5 MHz*2pi", "3.5 MHz·2π", "3.5 2pi*MHz", "21991148.575128552 rad/s"] {
            assert!((parse_angular(s).unwrap() - w).abs() < 1e-6, "{s}");
        }
    }

    #[test]
    fn rejects_ambiguous_or_missing_units() {
        assert!(parse_angular("3.5 MHz").is_err());
        assert!(parse_rate("5398").is_err());
        assert!(parse_time("50 furlongs").is_err());
        assert!(parse_rate("abc s^-1").is_err());
        assert!(parse_rate("1/(0 us)").is_err());
    }

    #[test]
    fn canonical_round_trip() {
        for (v, d) in [
            (5398.0, Dimension::Rate),
            (0.1 + 0.2, Dimension::Time),
            (2.0 * PI * 3.5e6, Dimension::AngularFrequency),
        ] {
            assert_eq!(parse_quantity(&format_quantity(v, d), d).unwrap(), v);
        }
    }
}
