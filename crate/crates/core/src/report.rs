// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Analysis reports and their text, JSON and CSV renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analytic::{ChannelKind, FirstOrderFormula};
use crate::config::{AnalysisConfig, OutputFormat};
use crate::error::{Error, Result};
use crate::liouville::{McEstimate, ScalingCheck};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRow {
    pub label: String,
    pub kind: ChannelKind,
    /// Subsystem counted from 1.
    pub qubit: Option<usize>,
    /// s⁻¹
    pub rate: f64,
    pub rate_convention: f64,
    pub gamma_tau: f64,
    pub coefficient: Option<f64>,
    pub contribution: Option<f64>,
    pub error_estimate: Option<f64>,
    pub rational_hint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub coefficients: Vec<f64>,
    pub fidelity_analytic: f64,
    pub fidelity_oracle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: String,
    pub labels: Vec<String>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub quad_tol: f64,
    pub solver_tol: f64,
    pub rng: String,
    pub threads: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub model: String,
    /// Resolved configuration with defaults expanded.
    pub config: AnalysisConfig,
    /// Reference time of the budget, s.
    pub tau: f64,
    pub tau_total: f64,
    pub formula: FirstOrderFormula,
    pub channels: Vec<ChannelRow>,
    pub fidelity_analytic: Option<f64>,
    pub quadrature_error_estimate: Option<f64>,
    pub fidelity_oracle: Option<f64>,
    pub solver_error_estimate: Option<f64>,
    pub residual: Option<f64>,
    /// 5·(Σ Γτ·convention)², the expected size of second-order terms.
    pub residual_bound: Option<f64>,
    pub monte_carlo: Option<McEstimate>,
    pub scaling: Option<ScalingCheck>,
    pub sweep: Option<SweepTable>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("cannot serialise report: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("report", e.to_string()))
    }

    /// The sweep table when present, otherwise the per-channel table.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Numerical(format!("cannot write CSV: {e}"));
        if let Some(sweep) = &self.sweep {
            let mut header = vec![sweep.parameter.clone()];
            header.extend(sweep.labels.iter().map(|l| format!("coefficient_{l}")));
            header.push("fidelity_analytic".into());
            header.push("fidelity_oracle".into());
            w.write_record(&header).map_err(csv_err)?;
            for row in &sweep.rows {
                let mut rec = vec![repr(row.value)];
                rec.extend(row.coefficients.iter().map(|&c| repr(c)));
                rec.push(repr(row.fidelity_analytic));
                rec.push(row.fidelity_oracle.map(repr).unwrap_or_default());
                w.write_record(&rec).map_err(csv_err)?;
            }
        } else {
            for row in &self.channels {
                w.serialize(row).map_err(csv_err)?;
            }
            if self.channels.is_empty() {
                w.write_record(CHANNEL_COLUMNS).map_err(csv_err)?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Numerical(format!("cannot write CSV: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "gatefid {}: {} (τ = {:e} s, gate duration {:e} s, {} formula)",
            self.command,
            self.model,
            self.tau,
            self.tau_total,
            formula_name(self.formula)
        );
        if !self.channels.is_empty() && self.sweep.is_none() {
            let _ = writeln!(
                out,
                "{:<18} {:>13} {:>6} {:>11} {:>16} {:>13}  hint",
                "channel", "rate [s^-1]", "conv", "Γτ", "coefficient", "contribution"
            );
            for r in &self.channels {
                let _ = writeln!(
                    out,
                    "{:<18} {:>13.6e} {:>6} {:>11.4e} {:>16} {:>13}  {}",
                    r.label,
                    r.rate,
                    r.rate_convention,
                    r.gamma_tau,
                    r.coefficient.map_or("-".into(), |c| format!("{c:.12}")),
                    r.contribution.map_or("-".into(), |c| format!("{c:.6e}")),
                    r.rational_hint.as_deref().unwrap_or("")
                );
            }
        }
        if let Some(s) = &self.sweep {
            let _ = write!(out, "{:>14}", s.parameter);
            for l in &s.labels {
                let _ = write!(out, " {l:>16}");
            }
            let _ = writeln!(out, " {:>16} {:>16}", "F̄ analytic", "F̄ oracle");
            for r in &s.rows {
                let _ = write!(out, "{:>14.6}", r.value);
                for c in &r.coefficients {
                    let _ = write!(out, " {c:>16.12}");
                }
                let _ = writeln!(
                    out,
                    " {:>16.12} {:>16}",
                    r.fidelity_analytic,
                    r.fidelity_oracle.map_or("-".into(), |f| format!("{f:.12}"))
                );
            }
        }
        if let Some(f) = self.fidelity_analytic {
            let _ = writeln!(out, "F̄ analytic   = {f:.12}");
        }
        if let Some(f) = self.fidelity_oracle {
            let _ = writeln!(out, "F̄ oracle     = {f:.12}");
        }
        if let Some(r) = self.residual {
            let _ = writeln!(
                out,
                "residual     = {r:.3e} (second-order scale {:.3e})",
                self.residual_bound.unwrap_or(f64::NAN)
            );
        }
        if let Some(mc) = &self.monte_carlo {
            let _ = writeln!(
                out,
                "F̄ Monte Carlo = {:.12} ± {:.2e} ({} samples, {} seed {})",
                mc.mean, mc.std_error, mc.n_samples, mc.rng, mc.seed
            );
        }
        if let Some(s) = &self.scaling {
            match s.slope {
                Some(slope) => {
                    let _ = writeln!(out, "residual scaling exponent = {slope:.3} over scales {:?}", s.scales);
                }
                None => {
                    let _ = writeln!(
                        out,
                        "residual scaling inconclusive: residuals below noise floor {:.2e}",
                        s.noise_floor
                    );
                }
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let p = &self.provenance;
        let _ = writeln!(
            out,
            "gatefid {} | seed {} | quad tol {:e} | solver tol {:e} | {} threads | {:.3} s",
            p.version, p.seed, p.quad_tol, p.solver_tol, p.threads, p.wall_time_s
        );
        out
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Text => Ok(self.to_text()),
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

const CHANNEL_COLUMNS: [&str; 10] = [
    "label",
    "kind",
    "qubit",
    "rate",
    "rate_convention",
    "gamma_tau",
    "coefficient",
    "contribution",
    "error_estimate",
    "rational_hint",
];

fn repr(v: f64) -> String {
    format!("{v:?}")
}

fn formula_name(f: FirstOrderFormula) -> &'static str {
    match f {
        FirstOrderFormula::Projected => "projected",
        FirstOrderFormula::HaarExact => "haar-exact",
    }
}

/// Parses the per-channel CSV table written by [`Report::to_csv`].
pub fn channel_rows_from_csv(text: &str) -> Result<Vec<ChannelRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(|e| Error::config("csv", e.to_string())))
        .collect()
}
