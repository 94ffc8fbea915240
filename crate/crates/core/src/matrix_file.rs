// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Plain-text complex matrices: a `dim <n>` header, then n rows of n
//! whitespace-separated `re,im` pairs. Blank lines and `#` comments are
//! skipped.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{c, Mat};

pub fn parse_matrix(text: &str, source: &str) -> Result<Mat> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: String| Error::Config {
        location: format!("{source}:{line}"),
        message: msg,
    };
    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty matrix file".into()))?;
    let n: usize = header
        .strip_prefix("dim")
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| err(hline, format!("expected `dim <n>`, found `{header}`")))?;
    let mut m = Mat::zeros(n, n);
    let mut row = 0;
    for (lineno, line) in lines {
        if row == n {
            return Err(err(lineno, format!("more than {n} rows")));
        }
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != n {
            return Err(err(lineno, format!("row has {} entries, expected {n}", entries.len())));
        }
        for (col, e) in entries.iter().enumerate() {
            let (re, im) = e
                .split_once(',')
                .ok_or_else(|| err(lineno, format!("entry `{e}` is not a `re,im` pair")))?;
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(lineno, format!("cannot parse `{s}` as a finite number")))
            };
            m[(row, col)] = c(parse(re)?, parse(im)?);
        }
        row += 1;
    }
    if row != n {
        return Err(err(hline, format!("found {row} rows, expected {n}")));
    }
    Ok(m)
}

pub fn read_matrix(path: &Path) -> Result<Mat> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        location: path.display().to_string(),
        message: format!("cannot read matrix file: {e}"),
    })?;
    parse_matrix(&text, &path.display().to_string())
}

/// Inverse of [`parse_matrix`]; values use the shortest round-trip form.
pub fn format_matrix(m: &Mat) -> String {
    let mut out = format!("dim {}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:?},{:?}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = "# sigma minus\ndim 2\n0,0 1,0\n0,0 0,0\n";
        let m = parse_matrix(text, "t").unwrap();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
        assert_eq!(parse_matrix(&format_matrix(&m), "t").unwrap(), m);
    }

    #[test]
    fn reports_location() {
        let e = parse_matrix("dim 2\n0,0 1,0\n0,0\n", "op.txt").unwrap_err();
        match e {
            Error::Config { location, .. } => assert_eq!(location, "op.txt:3"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_matrix("dimension 2", "x").is_err());
        assert!(parse_matrix("dim 1\n1;0\n", "x").is_err());
        assert!(parse_matrix("dim 1\n", "x").is_err());
    }
}
