// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! The `gatefid` command line: `budget`, `oracle`, `compare` and `sweep`.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::analytic::{assemble_budget, FidelityBudget, NoiseChannel};
use crate::config::{load_config, OutputFormat, ResolvedConfig};
use crate::error::{Error, Result};
use crate::gatelib::{parallel_budget_reduced, GateModel};
use crate::liouville::{
    channel_tomography, haar_average_fidelity, haar_mc_fidelity, residual_scaling_check,
    ChannelTomogram, RNG_NAME,
};
use crate::propagator::effective_target;
use crate::rational::hint_text;
use crate::report::{ChannelRow, Provenance, Report, SweepRow, SweepTable};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "GATEFID_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gatefid", version, about = "Average gate fidelity budgets under Markovian noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First-order error budget per channel.
    Budget(RunArgs),
    /// Exact average fidelity from the master equation.
    Oracle(RunArgs),
    /// Budget against the exact average fidelity.
    Compare(RunArgs),
    /// Budget over a one-parameter grid.
    Sweep(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Configuration file (TOML).
    pub config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo samples (0 disables the cross-check).
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Command {
    pub fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Budget(a) => ("budget", a),
            Command::Oracle(a) => ("oracle", a),
            Command::Compare(a) => ("compare", a),
            Command::Sweep(a) => ("sweep", a),
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Validation(_) | Error::Io(_) => EXIT_CONFIG,
        Error::Numerical(_)
        | Error::Quadrature { .. }
        | Error::Solver(_)
        | Error::TimeOutOfRange { .. } => EXIT_NUMERICAL,
    }
}

/// Applies the command-line overrides to a loaded configuration.
pub fn apply_overrides(cfg: &mut ResolvedConfig, args: &RunArgs) -> Result<()> {
    if let Some(seed) = args.seed {
        cfg.options.seed = seed;
    }
    if let Some(n) = args.mc_samples {
        if n != 0 && n < 100 {
            return Err(Error::config("--mc-samples", "must be 0 or at least 100"));
        }
        cfg.options.mc_samples = n;
    }
    if let Some(tol) = args.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::config("--tol", "must be positive"));
        }
        cfg.options.quad_tol = tol;
    }
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    Ok(())
}

/// Sets the global worker count from [`THREADS_ENV`] when present.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::config(THREADS_ENV, format!("expected a positive integer, got `{v}`")))?;
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn budget_for(model: &GateModel, channels: &[NoiseChannel], cfg: &ResolvedConfig) -> Result<FidelityBudget> {
    let opts = cfg.options.budget_options();
    if cfg.options.reduced_parallel && !model.parts.is_empty() {
        parallel_budget_reduced(model, channels, &opts)
    } else {
        assemble_budget(&model.schedule, channels, &opts)
    }
}

fn channel_rows(channels: &[NoiseChannel], tau: f64, budget: Option<&FidelityBudget>) -> Vec<ChannelRow> {
    channels
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let entry = budget.map(|b| &b.entries[i]);
            ChannelRow {
                label: ch.label.clone(),
                kind: ch.kind,
                qubit: ch.site.map(|s| s + 1),
                rate: ch.rate,
                rate_convention: ch.rate_convention,
                gamma_tau: ch.rate * tau,
                coefficient: entry.map(|e| e.coefficient),
                contribution: entry.map(|e| e.contribution),
                error_estimate: entry.map(|e| e.error_estimate),
                rational_hint: entry.and_then(|e| hint_text(e.coefficient)),
            }
        })
        .collect()
}

struct OracleOutcome {
    fidelity: f64,
    solver_error: Option<f64>,
    tomogram: ChannelTomogram,
}

fn oracle_for(model: &GateModel, channels: &[NoiseChannel], cfg: &ResolvedConfig) -> Result<OracleOutcome> {
    let tomogram = channel_tomography(&model.schedule, channels, &cfg.options.solver_options())?;
    let fidelity = haar_average_fidelity(&tomogram, &effective_target(&model.schedule)?)?;
    Ok(OracleOutcome {
        fidelity,
        solver_error: tomogram.solver.as_ref().map(|r| r.error_estimate),
        tomogram,
    })
}

fn second_order_scale(channels: &[NoiseChannel], tau: f64) -> f64 {
    let s: f64 = channels.iter().map(|c| c.rate * tau * c.rate_convention).sum();
    5.0 * s * s
}

/// Runs one command. The returned flag is true when a requested scaling
/// check was inconclusive.
pub fn execute(kind: &str, cfg: &ResolvedConfig) -> Result<(Report, bool)> {
    let start = Instant::now();
    let model = cfg.model()?;
    let channels = cfg.channels_for(&model)?;
    let tau = model.schedule.reference_time();
    let mut report = Report {
        command: kind.to_string(),
        model: model.name.clone(),
        config: cfg.echo(),
        tau,
        tau_total: model.schedule.tau_total(),
        formula: cfg.options.formula,
        channels: Vec::new(),
        fidelity_analytic: None,
        quadrature_error_estimate: None,
        fidelity_oracle: None,
        solver_error_estimate: None,
        residual: None,
        residual_bound: None,
        monte_carlo: None,
        scaling: None,
        sweep: None,
        warnings: Vec::new(),
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.options.seed,
            quad_tol: cfg.options.quad_tol,
            solver_tol: cfg.options.solver_tol,
            rng: RNG_NAME.to_string(),
            threads: rayon::current_num_threads(),
            wall_time_s: 0.0,
        },
    };
    let mut inconclusive = false;

    let needs_budget = matches!(kind, "budget" | "compare" | "sweep");
    let needs_oracle = matches!(kind, "oracle" | "compare");
    let budget = if needs_budget && kind != "sweep" {
        let b = budget_for(&model, &channels, cfg)?;
        report.fidelity_analytic = Some(b.total);
        report.quadrature_error_estimate = Some(b.quadrature_error_estimate);
        report.warnings.extend(b.warnings.iter().cloned());
        Some(b)
    } else {
        None
    };
    report.channels = channel_rows(&channels, tau, budget.as_ref());

    if needs_oracle {
        let oracle = oracle_for(&model, &channels, cfg)?;
        report.fidelity_oracle = Some(oracle.fidelity);
        report.solver_error_estimate = oracle.solver_error;
        if cfg.options.mc_samples > 0 {
            let target = effective_target(&model.schedule)?;
            report.monte_carlo = Some(haar_mc_fidelity(
                &oracle.tomogram,
                &target,
                cfg.options.mc_samples,
                cfg.options.seed,
            )?);
        }
        if let Some(b) = &budget {
            report.residual = Some(oracle.fidelity - b.total);
            report.residual_bound = Some(second_order_scale(&channels, tau));
        }
    }

    if kind == "compare" && !cfg.options.scales.is_empty() {
        let target = effective_target(&model.schedule)?;
        let check = residual_scaling_check(
            &model.schedule,
            &channels,
            &target,
            &cfg.options.scales,
            &cfg.options.budget_options(),
            &cfg.options.solver_options(),
        )?;
        inconclusive = check.inconclusive;
        if inconclusive {
            report
                .warnings
                .push("residual scaling check inconclusive: residuals below the solver noise floor".into());
        }
        report.scaling = Some(check);
    }

    if kind == "sweep" {
        let sweep = cfg
            .sweep
            .as_ref()
            .ok_or_else(|| Error::config("sweep", "the sweep command needs a [sweep] table"))?;
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for value in sweep.values() {
            let gate = cfg.gate.with_parameter(&sweep.parameter, value)?;
            let m = gate.build()?;
            let ch = cfg.channels_for(&m)?;
            let b = budget_for(&m, &ch, cfg)?;
            if labels.is_empty() {
                labels = b.entries.iter().map(|e| e.label.clone()).collect();
            }
            for w in &b.warnings {
                if !report.warnings.contains(w) {
                    report.warnings.push(w.clone());
                }
            }
            let fidelity_oracle = if sweep.oracle {
                Some(oracle_for(&m, &ch, cfg)?.fidelity)
            } else {
                None
            };
            rows.push(SweepRow {
                value,
                coefficients: b.coefficients(),
                fidelity_analytic: b.total,
                fidelity_oracle,
            });
        }
        report.sweep = Some(SweepTable {
            parameter: sweep.parameter.clone(),
            labels,
            rows,
        });
    }

    report.provenance.wall_time_s = start.elapsed().as_secs_f64();
    Ok((report, inconclusive))
}

/// Full command-line run; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (kind, args) = cli.command.parts();
    let outcome = init_threads()
        .and_then(|_| load_config(&args.config))
        .and_then(|mut cfg| {
            apply_overrides(&mut cfg, args)?;
            let (report, inconclusive) = execute(kind, &cfg)?;
            let text = report.render(cfg.output.format)?;
            match &cfg.output.path {
                Some(path) => std::fs::write(path, &text).map_err(|e| Error::Config {
                    location: path.display().to_string(),
                    message: format!("cannot write report: {e}"),
                })?,
                None => print!("{text}"),
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(inconclusive)
        });
    match outcome {
        Ok(false) => EXIT_OK,
        Ok(true) => EXIT_INCONCLUSIVE,
        Err(e) => {
            eprintln!("gatefid: {e}");
            exit_code(&e)
        }
    }
}
