// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Analysis configuration: a TOML document with mandatory units, resolved to
//! SI values, gate models and noise channels.
//!
//! ```toml
//! [gate]
//! model = "cz"
//! lambda = "10 MHz*2pi"
//!
//! [[channels]]
//! qubit = 1
//! kind = "relaxation"
//! rate = "1/(50 us)"
//!
//! [options]
//! seed = 7
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::{
    BudgetOptions, ChannelKind, FirstOrderFormula, NoiseChannel, QuadratureMethod, QuadratureSpec,
};
use crate::error::{Error, Result};
use crate::gatelib::{self, GateModel};
use crate::hilbert::{embed, OperatorMatrix, SystemLayout};
use crate::liouville::SolverOptions;
use crate::matrix_file::read_matrix;
use crate::propagator::{embed_cmp_gate, HamiltonianSchedule, PhaseConvention, Segment};
use crate::units::{format_quantity, parse_quantity, Dimension};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub gate: GateConfig,
    #[serde(default)]
    pub channels: Vec<ChannelConfig>,
    #[serde(default)]
    pub options: OptionsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateConfig {
    Cz {
        lambda: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<String>,
    },
    RydbergCz {
        omega: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta_over_omega: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xi: Option<f64>,
    },
    Cczs {
        lambda: String,
        #[serde(default)]
        phi: f64,
    },
    Iswap {
        g: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<String>,
    },
    Idle {
        dims: Vec<usize>,
        tau: String,
    },
    Parallel {
        parts: Vec<GateConfig>,
        #[serde(default)]
        pad: bool,
    },
    Custom {
        dims: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cmp_levels: Option<Vec<[usize; 2]>>,
        segments: Vec<SegmentConfig>,
        /// Target gate, either on the computational subspace or the full space.
        target: PathBuf,
        #[serde(default)]
        phase_convention: PhaseConvention,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference_time: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub hamiltonian: PathBuf,
    /// Angular-frequency unit of the matrix entries, e.g. "1 MHz*2pi".
    pub unit: String,
    pub duration: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// Subsystem, counted from 1.
    pub qubit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<f64>,
    pub rate: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureName {
    #[default]
    AdaptiveSimpson,
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionsConfig {
    pub quadrature: QuadratureName,
    pub gauss_legendre_order: usize,
    pub quad_tol: f64,
    pub max_subdivisions: usize,
    pub formula: FirstOrderFormula,
    /// Evaluate parallel models part by part with the register-size reduction.
    pub reduced_parallel: bool,
    pub solver_tol: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub scales: Vec<f64>,
}

impl Default for OptionsConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        OptionsConfig {
            quadrature: QuadratureName::AdaptiveSimpson,
            gauss_legendre_order: 64,
            quad_tol: q.abs_tol,
            max_subdivisions: q.max_subdivisions,
            formula: FirstOrderFormula::default(),
            reduced_parallel: false,
            solver_tol: SolverOptions::default().tol,
            mc_samples: 0,
            seed: 0,
            scales: Vec::new(),
        }
    }
}

impl OptionsConfig {
    pub fn budget_options(&self) -> BudgetOptions {
        let method = match self.quadrature {
            QuadratureName::AdaptiveSimpson => QuadratureMethod::AdaptiveSimpson,
            QuadratureName::GaussLegendre => QuadratureMethod::GaussLegendre {
                order: self.gauss_legendre_order,
            },
        };
        BudgetOptions {
            quadrature: QuadratureSpec {
                method,
                abs_tol: self.quad_tol,
                max_subdivisions: self.max_subdivisions,
            },
            formula: self.formula,
            parallel: None,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver_tol,
            ..SolverOptions::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("options.{name}"), format!("must be positive, got {v}")))
            }
        };
        positive("quad_tol", self.quad_tol)?;
        positive("solver_tol", self.solver_tol)?;
        if self.gauss_legendre_order == 0 {
            return Err(Error::config("options.gauss_legendre_order", "must be at least 1"));
        }
        if self.mc_samples != 0 && self.mc_samples < 100 {
            return Err(Error::config(
                "options.mc_samples",
                format!("must be 0 (off) or at least 100, got {}", self.mc_samples),
            ));
        }
        for (i, s) in self.scales.iter().enumerate() {
            positive(&format!("scales[{i}]"), *s)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    #[serde(default)]
    pub oracle: bool,
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n)
                .map(|k| self.from + (self.to - self.from) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Gate parameters in SI units with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Cz { lambda: f64, tau: f64 },
    RydbergCz { omega: f64, delta_over_omega: f64, xi: f64 },
    Cczs { lambda: f64, phi: f64 },
    Iswap { g: f64, tau: f64 },
    Idle { dims: Vec<usize>, tau: f64 },
    Parallel { parts: Vec<GateSpec>, pad: bool },
    Custom(CustomGate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CustomGate {
    pub dims: Vec<usize>,
    pub cmp_levels: Option<Vec<[usize; 2]>>,
    pub segments: Vec<SegmentConfig>,
    pub target: PathBuf,
    pub phase_convention: PhaseConvention,
    pub reference_time: Option<f64>,
    base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    /// A channel of the gate model, `{kind}_q{qubit}`.
    Template(String),
    /// An explicit jump operator, on one subsystem or on the full space.
    Matrix {
        path: PathBuf,
        label: String,
        convention: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub qubit: usize,
    pub source: ChannelSource,
    /// s⁻¹
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub gate: GateSpec,
    pub channels: Vec<ChannelSpec>,
    pub options: OptionsConfig,
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
    base_dir: PathBuf,
}

fn quantity(text: &str, dim: Dimension, location: &str) -> Result<f64> {
    parse_quantity(text, dim).map_err(|e| Error::config(location, e.0))
}

fn positive_quantity(text: &str, dim: Dimension, location: &str) -> Result<f64> {
    let v = quantity(text, dim, location)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(location, format!("must be positive, got `{text}`")))
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses a configuration document. `source` names it in error locations and
/// relative matrix paths are taken from `base_dir`.
pub fn parse_config(text: &str, source: &str, base_dir: &Path) -> Result<ResolvedConfig> {
    let raw: AnalysisConfig = toml::from_str(text).map_err(|e| {
        let location = match e.span() {
            Some(span) => format!("{source}:{}", line_of(text, span.start)),
            None => source.to_string(),
        };
        Error::Config {
            location,
            message: e.message().to_string(),
        }
    })?;
    resolve(&raw, base_dir)
}

pub fn load_config(path: &Path) -> Result<ResolvedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        location: path.display().to_string(),
        message: format!("cannot read configuration: {e}"),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &path.display().to_string(), &base)
}

pub fn resolve(raw: &AnalysisConfig, base_dir: &Path) -> Result<ResolvedConfig> {
    let gate = resolve_gate(&raw.gate, "gate", base_dir)?;
    let n_sub = gate.n_subsystems();
    let mut channels = Vec::with_capacity(raw.channels.len());
    for (i, ch) in raw.channels.iter().enumerate() {
        let loc = format!("channels[{i}]");
        if ch.qubit == 0 || ch.qubit > n_sub {
            return Err(Error::config(
                format!("{loc}.qubit"),
                format!("subsystem {} does not exist (gate has {n_sub}, counted from 1)", ch.qubit),
            ));
        }
        let rate = quantity(&ch.rate, Dimension::Rate, &format!("{loc}.rate"))?;
        if rate < 0.0 {
            return Err(Error::config(format!("{loc}.rate"), "rate must be non-negative"));
        }
        let source = match (&ch.kind, &ch.matrix) {
            (Some(kind), None) => {
                if ch.convention.is_some() || ch.label.is_some() {
                    return Err(Error::config(
                        &loc,
                        "label and convention apply only to matrix channels",
                    ));
                }
                ChannelSource::Template(format!("{kind}_q{}", ch.qubit))
            }
            (None, Some(path)) => {
                let convention = ch.convention.unwrap_or(1.0);
                if !(convention.is_finite() && convention >= 0.0) {
                    return Err(Error::config(format!("{loc}.convention"), "must be non-negative"));
                }
                ChannelSource::Matrix {
                    path: base_dir.join(path),
                    label: ch.label.clone().unwrap_or_else(|| format!("custom{}_q{}", i + 1, ch.qubit)),
                    convention,
                }
            }
            _ => {
                return Err(Error::config(&loc, "give exactly one of `kind` or `matrix`"));
            }
        };
        channels.push(ChannelSpec {
            qubit: ch.qubit,
            source,
            rate,
        });
    }
    raw.options.validate()?;
    if let Some(sweep) = &raw.sweep {
        if sweep.points == 0 {
            return Err(Error::config("sweep.points", "must be at least 1"));
        }
        if !(sweep.from.is_finite() && sweep.to.is_finite()) {
            return Err(Error::config("sweep", "bounds must be finite"));
        }
        gate.with_parameter(&sweep.parameter, sweep.from)
            .map_err(|e| Error::config("sweep.parameter", e.to_string()))?;
    }
    let resolved = ResolvedConfig {
        gate,
        channels,
        options: raw.options.clone(),
        sweep: raw.sweep.clone(),
        output: raw.output.clone(),
        base_dir: base_dir.to_path_buf(),
    };
    // template names are checked against the built model
    resolved.model()?;
    Ok(resolved)
}

fn resolve_gate(raw: &GateConfig, loc: &str, base_dir: &Path) -> Result<GateSpec> {
    let ang = |t: &str, f: &str| positive_quantity(t, Dimension::AngularFrequency, &format!("{loc}.{f}"));
    let time = |t: &str, f: &str| positive_quantity(t, Dimension::Time, &format!("{loc}.{f}"));
    let finite = |v: f64, f: &str| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::config(format!("{loc}.{f}"), "must be finite"))
        }
    };
    Ok(match raw {
        GateConfig::Cz { lambda, tau } => {
            let lambda = ang(lambda, "lambda")?;
            let tau = match tau {
                Some(t) => time(t, "tau")?,
                None => PI / lambda,
            };
            GateSpec::Cz { lambda, tau }
        }
        GateConfig::RydbergCz {
            omega,
            delta_over_omega,
            xi,
        } => GateSpec::RydbergCz {
            omega: ang(omega, "omega")?,
            delta_over_omega: finite(
                delta_over_omega.unwrap_or(gatelib::RYDBERG_DELTA_OVER_OMEGA),
                "delta_over_omega",
            )?,
            xi: finite(xi.unwrap_or(gatelib::RYDBERG_XI), "xi")?,
        },
        GateConfig::Cczs { lambda, phi } => GateSpec::Cczs {
            lambda: ang(lambda, "lambda")?,
            phi: finite(*phi, "phi")?,
        },
        GateConfig::Iswap { g, tau } => {
            let g = ang(g, "g")?;
            let tau = match tau {
                Some(t) => time(t, "tau")?,
                None => PI / (2.0 * g),
            };
            GateSpec::Iswap { g, tau }
        }
        GateConfig::Idle { dims, tau } => GateSpec::Idle {
            dims: dims.clone(),
            tau: time(tau, "tau")?,
        },
        GateConfig::Parallel { parts, pad } => {
            if parts.is_empty() {
                return Err(Error::config(format!("{loc}.parts"), "needs at least one gate"));
            }
            let parts = parts
                .iter()
                .enumerate()
                .map(|(i, p)| resolve_gate(p, &format!("{loc}.parts[{i}]"), base_dir))
                .collect::<Result<_>>()?;
            GateSpec::Parallel { parts, pad: *pad }
        }
        GateConfig::Custom {
            dims,
            cmp_levels,
            segments,
            target,
            phase_convention,
            reference_time,
        } => {
            for (i, s) in segments.iter().enumerate() {
                ang(&s.unit, &format!("segments[{i}].unit"))?;
                time(&s.duration, &format!("segments[{i}].duration"))?;
            }
            GateSpec::Custom(CustomGate {
                dims: dims.clone(),
                cmp_levels: cmp_levels.clone(),
                segments: segments.clone(),
                target: target.clone(),
                phase_convention: *phase_convention,
                reference_time: reference_time
                    .as_deref()
                    .map(|t| time(t, "reference_time"))
                    .transpose()?,
                base_dir: base_dir.to_path_buf(),
            })
        }
    })
}

impl GateSpec {
    pub fn name(&self) -> &'static str {
        match self {
            GateSpec::Cz { .. } => "cz",
            GateSpec::RydbergCz { .. } => "rydberg_cz",
            GateSpec::Cczs { .. } => "cczs",
            GateSpec::Iswap { .. } => "iswap",
            GateSpec::Idle { .. } => "idle",
            GateSpec::Parallel { .. } => "parallel",
            GateSpec::Custom(_) => "custom",
        }
    }

    pub fn n_subsystems(&self) -> usize {
        match self {
            GateSpec::Cz { .. } | GateSpec::RydbergCz { .. } | GateSpec::Iswap { .. } => 2,
            GateSpec::Cczs { .. } => 3,
            GateSpec::Idle { dims, .. } => dims.len(),
            GateSpec::Parallel { parts, .. } => parts.iter().map(GateSpec::n_subsystems).sum(),
            GateSpec::Custom(c) => c.dims.len(),
        }
    }

    /// Names accepted by [`GateSpec::with_parameter`].
    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            GateSpec::Cz { .. } => &["lambda_tau_over_pi", "lambda", "tau"],
            GateSpec::RydbergCz { .. } => &["omega", "delta_over_omega", "xi"],
            GateSpec::Cczs { .. } => &["phi", "lambda"],
            GateSpec::Iswap { .. } => &["g_tau_over_pi", "g", "tau"],
            GateSpec::Idle { .. } => &["tau"],
            GateSpec::Parallel { .. } | GateSpec::Custom(_) => &[],
        }
    }

    /// A copy with one parameter replaced; dimensioned values are SI.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<GateSpec> {
        let mut g = self.clone();
        let ok = match (&mut g, name) {
            (GateSpec::Cz { lambda, tau }, "lambda_tau_over_pi") => {
                *lambda = value * PI / *tau;
                true
            }
            (GateSpec::Cz { lambda, .. }, "lambda")
            | (GateSpec::Cczs { lambda, .. }, "lambda")
            | (GateSpec::RydbergCz { omega: lambda, .. }, "omega")
            | (GateSpec::Iswap { g: lambda, .. }, "g") => {
                *lambda = value;
                true
            }
            (GateSpec::Cz { tau, .. }, "tau")
            | (GateSpec::Iswap { tau, .. }, "tau")
            | (GateSpec::Idle { tau, .. }, "tau") => {
                *tau = value;
                true
            }
            (GateSpec::Iswap { g, tau }, "g_tau_over_pi") => {
                *g = value * PI / *tau;
                true
            }
            (GateSpec::RydbergCz { delta_over_omega, .. }, "delta_over_omega") => {
                *delta_over_omega = value;
                true
            }
            (GateSpec::RydbergCz { xi, .. }, "xi") => {
                *xi = value;
                true
            }
            (GateSpec::Cczs { phi, .. }, "phi") => {
                *phi = value;
                true
            }
            _ => false,
        };
        if !ok {
            return Err(Error::Validation(format!(
                "gate {} has no sweepable parameter `{name}` (available: {})",
                self.name(),
                self.parameter_names().join(", ")
            )));
        }
        Ok(g)
    }

    pub fn build(&self) -> Result<GateModel> {
        match self {
            GateSpec::Cz { lambda, tau } => gatelib::transmon_cz(*lambda, *tau),
            GateSpec::RydbergCz {
                omega,
                delta_over_omega,
                xi,
            } => gatelib::rydberg_cz(*omega, delta_over_omega * omega, *xi),
            GateSpec::Cczs { lambda, phi } => gatelib::cczs(*lambda, *phi),
            GateSpec::Iswap { g, tau } => gatelib::iswap(*g, *tau),
            GateSpec::Idle { dims, tau } => gatelib::idle(dims, *tau),
            GateSpec::Parallel { parts, pad } => {
                let models = parts.iter().map(GateSpec::build).collect::<Result<Vec<_>>>()?;
                gatelib::parallel(&models, *pad)
            }
            GateSpec::Custom(c) => c.build(),
        }
    }

    /// Back to configuration form with canonical units.
    pub fn to_config(&self) -> GateConfig {
        let ang = |v: f64| format_quantity(v, Dimension::AngularFrequency);
        let time = |v: f64| format_quantity(v, Dimension::Time);
        match self {
            GateSpec::Cz { lambda, tau } => GateConfig::Cz {
                lambda: ang(*lambda),
                tau: Some(time(*tau)),
            },
            GateSpec::RydbergCz {
                omega,
                delta_over_omega,
                xi,
            } => GateConfig::RydbergCz {
                omega: ang(*omega),
                delta_over_omega: Some(*delta_over_omega),
                xi: Some(*xi),
            },
            GateSpec::Cczs { lambda, phi } => GateConfig::Cczs {
                lambda: ang(*lambda),
                phi: *phi,
            },
            GateSpec::Iswap { g, tau } => GateConfig::Iswap {
                g: ang(*g),
                tau: Some(time(*tau)),
            },
            GateSpec::Idle { dims, tau } => GateConfig::Idle {
                dims: dims.clone(),
                tau: time(*tau),
            },
            GateSpec::Parallel { parts, pad } => GateConfig::Parallel {
                parts: parts.iter().map(GateSpec::to_config).collect(),
                pad: *pad,
            },
            GateSpec::Custom(c) => GateConfig::Custom {
                dims: c.dims.clone(),
                cmp_levels: c.cmp_levels.clone(),
                segments: c
                    .segments
                    .iter()
                    .map(|s| SegmentConfig {
                        hamiltonian: c.base_dir.join(&s.hamiltonian),
                        ..s.clone()
                    })
                    .collect(),
                target: c.base_dir.join(&c.target),
                phase_convention: c.phase_convention,
                reference_time: c.reference_time.map(time),
            },
        }
    }
}

impl CustomGate {
    fn build(&self) -> Result<GateModel> {
        let layout = Arc::new(SystemLayout::compose(&self.dims, self.cmp_levels.as_deref())?);
        let n = layout.full_dim();
        let mut segments = Vec::with_capacity(self.segments.len());
        for (i, s) in self.segments.iter().enumerate() {
            let loc = format!("gate.segments[{i}]");
            let unit = quantity(&s.unit, Dimension::AngularFrequency, &format!("{loc}.unit"))?;
            let h = read_matrix(&self.base_dir.join(&s.hamiltonian))?;
            if h.nrows() != n {
                return Err(Error::config(
                    format!("{loc}.hamiltonian"),
                    format!("matrix is {0}x{0}, layout needs {n}x{n}", h.nrows()),
                ));
            }
            segments.push(Segment {
                generator: OperatorMatrix::new(layout.clone(), h.scale(unit))?,
                duration: quantity(&s.duration, Dimension::Time, &format!("{loc}.duration"))?,
            });
        }
        let u = read_matrix(&self.base_dir.join(&self.target))?;
        let target = if u.nrows() == layout.cmp_dim() {
            embed_cmp_gate(&layout, &u)?
        } else if u.nrows() == n {
            OperatorMatrix::new(layout.clone(), u)?
        } else {
            return Err(Error::config(
                "gate.target",
                format!(
                    "matrix is {0}x{0}; expected the computational ({1}) or full ({n}) dimension",
                    u.nrows(),
                    layout.cmp_dim()
                ),
            ));
        };
        let mut schedule = HamiltonianSchedule::new(layout.clone(), segments, target, self.phase_convention)?;
        if let Some(t) = self.reference_time {
            schedule = schedule.with_reference_time(t)?;
        }
        let zeros = vec![0.0; self.dims.len()];
        let channels = gatelib::transmon_noise(&layout, &zeros, &zeros)?;
        Ok(GateModel {
            name: "custom".into(),
            schedule,
            channels,
            parameters: Default::default(),
            parts: Vec::new(),
        })
    }
}

impl ResolvedConfig {
    pub fn model(&self) -> Result<GateModel> {
        self.gate.build()
    }

    /// The model's channels with configured rates (others at zero), followed
    /// by any matrix channels.
    pub fn channels_for(&self, model: &GateModel) -> Result<Vec<NoiseChannel>> {
        let mut rates = vec![0.0; model.channels.len()];
        let mut seen = vec![false; model.channels.len()];
        let mut extra = Vec::new();
        for (i, spec) in self.channels.iter().enumerate() {
            let loc = format!("channels[{i}]");
            match &spec.source {
                ChannelSource::Template(label) => {
                    let k = model.channels.iter().position(|c| &c.label == label).ok_or_else(|| {
                        Error::config(
                            &loc,
                            format!(
                                "model {} has no channel `{label}` (available: {})",
                                model.name,
                                model.labels().join(", ")
                            ),
                        )
                    })?;
                    if seen[k] {
                        return Err(Error::config(&loc, format!("channel `{label}` given twice")));
                    }
                    seen[k] = true;
                    rates[k] = spec.rate;
                }
                ChannelSource::Matrix {
                    path,
                    label,
                    convention,
                } => {
                    let layout = model.layout();
                    let m = read_matrix(path)?;
                    let site = spec.qubit - 1;
                    let jump = if m.nrows() == layout.full_dim() {
                        OperatorMatrix::new(layout.clone(), m)?
                    } else if m.nrows() == layout.dims()[site] {
                        embed(&m, site, layout)?
                    } else {
                        return Err(Error::config(
                            format!("{loc}.matrix"),
                            format!(
                                "matrix is {0}x{0}; expected subsystem dimension {1} or full dimension {2}",
                                m.nrows(),
                                layout.dims()[site],
                                layout.full_dim()
                            ),
                        ));
                    };
                    extra.push(NoiseChannel::new(
                        label.clone(),
                        ChannelKind::Custom,
                        Some(site),
                        jump,
                        spec.rate,
                        *convention,
                    )?);
                }
            }
        }
        let mut channels = model.channels_with_rates(&rates)?;
        channels.extend(extra);
        Ok(channels)
    }

    /// The configuration with defaults expanded and units canonical; parsing
    /// it again yields an identical resolved configuration.
    pub fn echo(&self) -> AnalysisConfig {
        AnalysisConfig {
            gate: self.gate.to_config(),
            channels: self
                .channels
                .iter()
                .map(|c| {
                    let rate = format_quantity(c.rate, Dimension::Rate);
                    match &c.source {
                        ChannelSource::Template(label) => ChannelConfig {
                            qubit: c.qubit,
                            kind: Some(
                                label
                                    .rsplit_once("_q")
                                    .map_or(label.as_str(), |(stem, _)| stem)
                                    .to_string(),
                            ),
                            matrix: None,
                            label: None,
                            convention: None,
                            rate,
                        },
                        ChannelSource::Matrix {
                            path,
                            label,
                            convention,
                        } => ChannelConfig {
                            qubit: c.qubit,
                            kind: None,
                            matrix: Some(path.clone()),
                            label: Some(label.clone()),
                            convention: Some(*convention),
                            rate,
                        },
                    }
                })
                .collect(),
            options: self.options.clone(),
            sweep: self.sweep.clone(),
            output: self.output.clone(),
        }
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ResolvedConfig> {
        parse_config(text, "test.toml", Path::new("."))
    }

    #[test]
    fn cz_defaults_and_channels() {
        let cfg = parse(
            r#"
            [gate]
            model = "cz"
            lambda = "10 MHz*2pi"

            [[channels]]
            qubit = 1
            kind = "relaxation"
            rate = "1/(50 us)"
            "#,
        )
        .unwrap();
        match cfg.gate {
            GateSpec::Cz { lambda, tau } => assert!((lambda * tau - PI).abs() < 1e-12),
            ref g => panic!("unexpected {g:?}"),
        }
        let model = cfg.model().unwrap();
        let ch = cfg.channels_for(&model).unwrap();
        assert_eq!(ch.len(), 4);
        assert!((ch[0].rate - 2e4).abs() < 1e-9);
        assert_eq!(ch[1].rate, 0.0);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse(
            r#"
            [gate]
            model = "rydberg_cz"
            omega = "3.5 MHz*2pi"
            [[channels]]
            qubit = 2
            kind = "decay"
            rate = "5398 s^-1"
            [options]
            seed = 3
            scales = [1.0, 2.0, 4.0]
            "#,
        )
        .unwrap();
        let text = toml::to_string(&cfg.echo()).unwrap();
        let again = parse(&text).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_carry_locations() {
        let missing_unit = parse("[gate]\nmodel = \"cz\"\nlambda = \"5\"\n").unwrap_err();
        assert!(matches!(missing_unit, Error::Config { ref location, .. } if location == "gate.lambda"));
        let bad_qubit = parse(
            "[gate]\nmodel = \"cz\"\nlambda = \"5 MHz*2pi\"\n[[channels]]\nqubit = 3\nkind = \"relaxation\"\nrate = \"1 s^-1\"\n",
        )
        .unwrap_err();
        assert!(matches!(bad_qubit, Error::Config { ref location, .. } if location == "channels[0].qubit"));
        let unknown = parse("[gate]\nmodel = \"cz\"\nlambda = \"5 MHz*2pi\"\ncolour = 1\n").unwrap_err();
        assert!(matches!(unknown, Error::Config { ref location, .. } if location.starts_with("test.toml:")));
        let bad_kind = parse(
            "[gate]\nmodel = \"cz\"\nlambda = \"5 MHz*2pi\"\n[[channels]]\nqubit = 1\nkind = \"decay\"\nrate = \"1 s^-1\"\n",
        )
        .unwrap();
        let bad_kind = bad_kind.channels_for(&bad_kind.model().unwrap()).unwrap_err();
        assert!(matches!(bad_kind, Error::Config { ref location, .. } if location == "channels[0]"));
    }

    #[test]
    fn sweep_parameters() {
        let g = GateSpec::Cz { lambda: PI, tau: 1.0 };
        match g.with_parameter("lambda_tau_over_pi", 0.9).unwrap() {
            GateSpec::Cz { lambda, .. } => assert!((lambda - 0.9 * PI).abs() < 1e-15),
            _ => unreachable!(),
        }
        assert!(g.with_parameter("phi", 1.0).is_err());
        let s = SweepConfig {
            parameter: "x".into(),
            from: 0.8,
            to: 1.2,
            points: 41,
            oracle: false,
        };
        let v = s.values();
        assert_eq!(v.len(), 41);
        assert_eq!(v[0], 0.8);
        assert_eq!(v[40], 1.2);
    }
}
