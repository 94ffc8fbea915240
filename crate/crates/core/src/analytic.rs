// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! First-order fidelity budgets.
//!
//! For a jump operator L with dissipator prefactor κ = Γ·convention, the
//! average gate fidelity to first order in Γτ is
//!
//! ```text
//! F̄ = 1 + κ ∫₀^τ δF(L(t)) dt,
//! δF(L) = |Tr_cmp L|² / (d(d+1)) − Tr_cmp[L†L] / (d+1),
//! ```
//!
//! with d = 2^N and L(t) the Heisenberg-picture jump operator. Budgets report
//! the dimensionless coefficient c = −(convention/τ) ∫ δF dt so that each
//! channel contributes c Γ τ.
//!
//! [`FirstOrderFormula::HaarExact`] evaluates the Haar average of the exact
//! first-order term instead. It differs from the projected formula by
//! −Tr(P L† Q L P)/(d(d+1)), which is nonzero only when L(t) carries
//! computational states out of the subspace (Q = 1 − P).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{OperatorMatrix, SystemLayout};
use crate::linalg::{self, Mat, SparseOp};
use crate::propagator::{HamiltonianSchedule, PropagatorCache};

/// Imaginary residue tolerated on quantities that are real by construction.
const IMAG_TOL: f64 = 1e-12;

/// Γτ above which budgets carry a first-order validity warning.
pub const FIRST_ORDER_WARN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Relaxation,
    Dephasing,
    Decay,
    Custom,
}

/// A Lindblad channel: the dissipator is `rate · rate_convention · D[jump]`.
#[derive(Debug, Clone)]
pub struct NoiseChannel {
    pub label: String,
    pub kind: ChannelKind,
    /// Subsystem the channel acts on, if local.
    pub site: Option<usize>,
    pub jump: OperatorMatrix,
    pub rate: f64,
    pub rate_convention: f64,
}

impl NoiseChannel {
    pub fn new(
        label: impl Into<String>,
        kind: ChannelKind,
        site: Option<usize>,
        jump: OperatorMatrix,
        rate: f64,
        rate_convention: f64,
    ) -> Result<Self> {
        let label = label.into();
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Validation(format!(
                "channel {label}: rate must be finite and non-negative, got {rate}"
            )));
        }
        if !(rate_convention.is_finite() && rate_convention >= 0.0) {
            return Err(Error::Validation(format!(
                "channel {label}: rate convention must be finite and non-negative, got {rate_convention}"
            )));
        }
        Ok(NoiseChannel {
            label,
            kind,
            site,
            jump,
            rate,
            rate_convention,
        })
    }

    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        Self::new(
            self.label.clone(),
            self.kind,
            self.site,
            self.jump.clone(),
            rate,
            self.rate_convention,
        )
    }

    /// Prefactor of the dissipator, rate × convention.
    pub fn effective_rate(&self) -> f64 {
        self.rate * self.rate_convention
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstOrderFormula {
    /// Subspace-projected traces, |Tr_cmp L|²/(d(d+1)) − Tr_cmp[L†L]/(d+1).
    #[default]
    Projected,
    /// Haar average of the exact first-order term of the master equation.
    HaarExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum QuadratureMethod {
    AdaptiveSimpson,
    /// Fixed order per segment; the error estimate compares orders n and 2n.
    GaussLegendre { order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    #[serde(flatten)]
    pub method: QuadratureMethod,
    /// Absolute tolerance on the normalised integral (1/τ)∫δF dt.
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: QuadratureMethod::AdaptiveSimpson,
            abs_tol: 1e-10,
            max_subdivisions: 1 << 16,
        }
    }
}

impl QuadratureSpec {
    pub fn gauss_legendre(order: usize) -> Self {
        QuadratureSpec {
            method: QuadratureMethod::GaussLegendre { order },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(Error::Validation(format!(
                "quadrature tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        if let QuadratureMethod::GaussLegendre { order } = self.method {
            if order == 0 {
                return Err(Error::Validation("Gauss-Legendre order must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Reduction of an m-qubit gate's channel inside an N-qubit register whose
/// other qubits idle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelContext {
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetOptions {
    pub quadrature: QuadratureSpec,
    pub formula: FirstOrderFormula,
    pub parallel: Option<ParallelContext>,
}

/// The three traces the first-order formulas need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpTraces {
    /// Tr_cmp L
    pub tr: Complex64,
    /// Tr_cmp[L†L]
    pub tr_ldl: f64,
    /// Tr[(PLP)†(PLP)]
    pub tr_plpl: f64,
}

impl JumpTraces {
    /// Traces of L(t) = U†LU given W = U(t)P.
    pub fn from_image(jump: &SparseOp, w: &Mat) -> Self {
        let mut lw = Mat::zeros(w.nrows(), w.ncols());
        jump.mul_add(w, linalg::ONE, &mut lw);
        let m = w.adjoint() * &lw;
        JumpTraces {
            tr: linalg::trace(&m),
            tr_ldl: lw.norm_squared(),
            tr_plpl: m.norm_squared(),
        }
    }

    pub fn of(lt: &OperatorMatrix) -> Result<Self> {
        let p = lt.project_cmp();
        let tr = lt.trace_cmp();
        let ldl = lt.dagger().matmul(lt)?.trace_cmp();
        if ldl.im.abs() > IMAG_TOL * ldl.re.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "Tr_cmp[L†L] has imaginary part {:e}",
                ldl.im
            )));
        }
        Ok(JumpTraces {
            tr,
            tr_ldl: ldl.re,
            tr_plpl: p.norm_squared(),
        })
    }

    fn evaluate(&self, d: f64, formula: FirstOrderFormula) -> f64 {
        let t2 = self.tr.norm_sqr();
        match formula {
            FirstOrderFormula::Projected => t2 / (d * (d + 1.0)) - self.tr_ldl / (d + 1.0),
            FirstOrderFormula::HaarExact => {
                (t2 + self.tr_plpl) / (d * (d + 1.0)) - self.tr_ldl / d
            }
        }
    }

    fn evaluate_parallel(&self, ctx: ParallelContext, formula: FirstOrderFormula) -> f64 {
        let d = 2f64.powi(ctx.n as i32);
        let dm = 2f64.powi(ctx.m as i32);
        let t2 = self.tr.norm_sqr();
        match formula {
            FirstOrderFormula::Projected => {
                d / (dm * dm * (d + 1.0)) * t2 - d / (dm * (d + 1.0)) * self.tr_ldl
            }
            FirstOrderFormula::HaarExact => {
                let db = d / dm;
                (db * db * t2 + db * self.tr_plpl) / (d * (d + 1.0)) - db * self.tr_ldl / d
            }
        }
    }
}

/// Fidelity-reduction density of a (Heisenberg-picture) jump operator.
pub fn delta_f(lt: &OperatorMatrix) -> Result<f64> {
    delta_f_with(lt, FirstOrderFormula::Projected)
}

pub fn delta_f_with(lt: &OperatorMatrix, formula: FirstOrderFormula) -> Result<f64> {
    let cross = lt.dagger().trace_cmp() * lt.trace_cmp();
    if cross.im.abs() > IMAG_TOL * cross.re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "Tr_cmp[L†]Tr_cmp[L] has imaginary part {:e}",
            cross.im
        )));
    }
    let d = lt.layout().cmp_dim() as f64;
    Ok(JumpTraces::of(lt)?.evaluate(d, formula))
}

/// Haar-exact density; equals [`delta_f`] when L(t) leaves the subspace invariant.
pub fn delta_f_haar_exact(lt: &OperatorMatrix) -> Result<f64> {
    delta_f_with(lt, FirstOrderFormula::HaarExact)
}

/// Time-independent value for gates that stay inside the computational
/// subspace, evaluated on the projection P L P.
pub fn delta_f_subspace(l: &OperatorMatrix) -> f64 {
    let p = l.project_cmp();
    let d = p.nrows() as f64;
    let tr = linalg::trace(&p);
    tr.norm_sqr() / (d * (d + 1.0)) - p.norm_squared() / (d + 1.0)
}

/// Density for a channel of an m-qubit gate embedded in an N-qubit register.
/// `lt_m` lives on the m-qubit gate's own layout.
pub fn delta_f_parallel(lt_m: &OperatorMatrix, m: usize, n: usize) -> Result<f64> {
    let ctx = parallel_context(lt_m.layout(), m, n)?;
    Ok(JumpTraces::of(lt_m)?.evaluate_parallel(ctx, FirstOrderFormula::Projected))
}

fn parallel_context(layout: &SystemLayout, m: usize, n: usize) -> Result<ParallelContext> {
    if m > n {
        return Err(Error::Validation(format!(
            "subsystem qubit count m = {m} exceeds register size N = {n}"
        )));
    }
    if layout.n_subsystems() != m {
        return Err(Error::Validation(format!(
            "operator spans {} subsystems, expected m = {m}",
            layout.n_subsystems()
        )));
    }
    if n >= 31 {
        return Err(Error::Validation(format!("register size N = {n} too large")));
    }
    Ok(ParallelContext { m, n })
}

/// Evaluates δF(L(t)) along a schedule.
pub struct DensityEvaluator<'a> {
    cache: &'a PropagatorCache<'a>,
    jump: SparseOp,
    d: f64,
    formula: FirstOrderFormula,
    parallel: Option<ParallelContext>,
}

impl<'a> DensityEvaluator<'a> {
    pub fn new(
        cache: &'a PropagatorCache<'a>,
        channel: &NoiseChannel,
        formula: FirstOrderFormula,
        parallel: Option<ParallelContext>,
    ) -> Result<Self> {
        let layout = cache.schedule().layout();
        if channel.jump.layout() != layout {
            return Err(Error::Validation(format!(
                "channel {}: jump operator layout differs from schedule layout",
                channel.label
            )));
        }
        if let Some(ctx) = parallel {
            parallel_context(layout, ctx.m, ctx.n)?;
        }
        Ok(DensityEvaluator {
            cache,
            jump: SparseOp::from_dense(channel.jump.data()),
            d: layout.cmp_dim() as f64,
            formula,
            parallel,
        })
    }

    pub fn traces(&self, t: f64) -> Result<JumpTraces> {
        let w = self.cache.propagator_cmp(t)?;
        Ok(JumpTraces::from_image(&self.jump, &w))
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        if self.jump.is_empty() {
            return Ok(0.0);
        }
        let tr = self.traces(t)?;
        Ok(match self.parallel {
            Some(ctx) => tr.evaluate_parallel(ctx, self.formula),
            None => tr.evaluate(self.d, self.formula),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// ∫ f over [a, b] to absolute tolerance `tol`.
pub fn integrate<F>(f: &F, a: f64, b: f64, tol: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    match spec.method {
        QuadratureMethod::AdaptiveSimpson => adaptive_simpson(f, a, b, tol, spec.max_subdivisions),
        QuadratureMethod::GaussLegendre { order } => {
            let lo = gauss_legendre_fixed(f, a, b, order)?;
            let hi = gauss_legendre_fixed(f, a, b, 2 * order)?;
            let err = (hi - lo).abs();
            if err > tol {
                return Err(Error::Quadrature { estimate: err, tol });
            }
            Ok(Integral {
                value: hi,
                error_estimate: err,
                evaluations: 3 * order,
            })
        }
    }
}

fn gauss_legendre_fixed<F>(f: &F, a: f64, b: f64, order: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (x, w) = linalg::gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        acc += wi * f(mid + half * xi)?;
    }
    Ok(acc * half)
}

// Panels per integration range before adaptive refinement starts; guards
// against accidental agreement of coarse Simpson estimates on periodic data.
const SIMPSON_INITIAL_PANELS: usize = 16;
const SIMPSON_MAX_DEPTH: usize = 50;

fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64, max_sub: usize) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    }
    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    let h = (b - a) / SIMPSON_INITIAL_PANELS as f64;
    let mut evaluations = 0usize;
    let mut eval = |t: f64| {
        evaluations += 1;
        f(t)
    };
    let mut stack = Vec::new();
    let mut left = eval(a)?;
    for k in 0..SIMPSON_INITIAL_PANELS {
        let pa = a + h * k as f64;
        let pb = if k + 1 == SIMPSON_INITIAL_PANELS { b } else { a + h * (k + 1) as f64 };
        let fm = eval(0.5 * (pa + pb))?;
        let fb = eval(pb)?;
        stack.push(Panel {
            a: pa,
            b: pb,
            fa: left,
            fm,
            fb,
            whole: simpson(pa, pb, left, fm, fb),
            tol: tol / SIMPSON_INITIAL_PANELS as f64,
            depth: 0,
        });
        left = fb;
    }

    let mut value = 0.0;
    let mut error = 0.0;
    let mut subdivisions = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = eval(0.5 * (p.a + m))?;
        let frm = eval(0.5 * (m + p.b))?;
        let l = simpson(p.a, m, p.fa, flm, p.fm);
        let r = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = l + r - p.whole;
        if delta.abs() <= 15.0 * p.tol || p.depth >= SIMPSON_MAX_DEPTH {
            value += l + r + delta / 15.0;
            error += delta.abs() / 15.0;
            continue;
        }
        subdivisions += 1;
        if subdivisions > max_sub {
            return Err(Error::Quadrature {
                estimate: error + delta.abs() / 15.0,
                tol,
            });
        }
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: l,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: r,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
    }
    if error > tol {
        return Err(Error::Quadrature { estimate: error, tol });
    }
    Ok(Integral {
        value,
        error_estimate: error,
        evaluations,
    })
}

/// (1/τ_ref) ∫₀^{τ_total} δF(L(t)) dt, integrated segment by segment.
pub fn normalized_integral(
    cache: &PropagatorCache<'_>,
    channel: &NoiseChannel,
    options: &BudgetOptions,
) -> Result<Integral> {
    options.quadrature.validate()?;
    let schedule = cache.schedule();
    let eval = DensityEvaluator::new(cache, channel, options.formula, options.parallel)?;
    let tau_ref = schedule.reference_time();
    let bounds = schedule.boundaries();
    let total = schedule.tau_total();
    let f = |t: f64| eval.at(t);
    let mut acc = Integral {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    for w in bounds.windows(2) {
        let share = (w[1] - w[0]) / total;
        let tol = options.quadrature.abs_tol * tau_ref * share;
        let seg = integrate(&f, w[0], w[1], tol, &options.quadrature)?;
        acc.value += seg.value / tau_ref;
        acc.error_estimate += seg.error_estimate / tau_ref;
        acc.evaluations += seg.evaluations;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelCoefficient {
    pub coefficient: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// c = −(convention/τ) ∫₀^τ δF(L(t)) dt.
pub fn channel_coefficient(
    schedule: &HamiltonianSchedule,
    channel: &NoiseChannel,
    options: &BudgetOptions,
) -> Result<ChannelCoefficient> {
    let cache = schedule.cache();
    coefficient_with_cache(&cache, channel, options)
}

fn coefficient_with_cache(
    cache: &PropagatorCache<'_>,
    channel: &NoiseChannel,
    options: &BudgetOptions,
) -> Result<ChannelCoefficient> {
    let integral = normalized_integral(cache, channel, options)?;
    let coefficient = -channel.rate_convention * integral.value;
    let error_estimate = channel.rate_convention * integral.error_estimate;
    if coefficient < -(error_estimate + 1e3 * f64::EPSILON) {
        return Err(Error::Numerical(format!(
            "channel {}: negative first-order coefficient {coefficient:e}",
            channel.label
        )));
    }
    Ok(ChannelCoefficient {
        coefficient,
        error_estimate,
        evaluations: integral.evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub label: String,
    pub kind: ChannelKind,
    pub site: Option<usize>,
    /// Γ in s⁻¹.
    pub rate: f64,
    pub rate_convention: f64,
    pub coefficient: f64,
    /// c Γ τ
    pub contribution: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityBudget {
    pub entries: Vec<BudgetEntry>,
    pub total: f64,
    /// Reference time τ of the contributions c Γ τ, in seconds.
    pub tau: f64,
    pub tau_total: f64,
    pub quadrature_error_estimate: f64,
    pub formula: FirstOrderFormula,
    pub warnings: Vec<String>,
}

impl FidelityBudget {
    pub fn from_entries(
        entries: Vec<BudgetEntry>,
        tau: f64,
        tau_total: f64,
        formula: FirstOrderFormula,
    ) -> Self {
        let total = 1.0 - entries.iter().map(|e| e.contribution).sum::<f64>();
        let quadrature_error_estimate = entries.iter().map(|e| e.error_estimate).sum();
        let warnings = entries
            .iter()
            .filter(|e| e.rate * tau > FIRST_ORDER_WARN)
            .map(|e| {
                format!(
                    "channel {}: Γτ = {:.3} exceeds {FIRST_ORDER_WARN}; first-order expansion may be inaccurate",
                    e.label,
                    e.rate * tau
                )
            })
            .collect();
        FidelityBudget {
            entries,
            total,
            tau,
            tau_total,
            quadrature_error_estimate,
            formula,
            warnings,
        }
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.coefficient).collect()
    }

    pub fn entry(&self, label: &str) -> Option<&BudgetEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn infidelity(&self) -> f64 {
        self.entries.iter().map(|e| e.contribution).sum()
    }
}

/// Per-channel coefficients and F̄ = 1 − Σ c Γ τ. Channels are evaluated in
/// parallel and summed in input order.
pub fn assemble_budget(
    schedule: &HamiltonianSchedule,
    channels: &[NoiseChannel],
    options: &BudgetOptions,
) -> Result<FidelityBudget> {
    let cache = schedule.cache();
    let tau = schedule.reference_time();
    let entries = channels
        .par_iter()
        .map(|ch| {
            let c = coefficient_with_cache(&cache, ch, options)?;
            Ok(BudgetEntry {
                label: ch.label.clone(),
                kind: ch.kind,
                site: ch.site,
                rate: ch.rate,
                rate_convention: ch.rate_convention,
                coefficient: c.coefficient,
                contribution: c.coefficient * ch.rate * tau,
                error_estimate: c.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityBudget::from_entries(
        entries,
        tau,
        schedule.tau_total(),
        options.formula,
    ))
}

/// Rates Γ₁ and Γ_φ of the two transmons of a CZ gate, in s⁻¹.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CzRates {
    pub relaxation: [f64; 2],
    pub dephasing: [f64; 2],
}

/// Closed-form coefficients of the transmon CZ for arbitrary λτ, ordered as
/// (relaxation q1, relaxation q2, dephasing q1, dephasing q2). Dephasing
/// carries the transmon convention factor 2.
pub fn imperfect_cz_coefficients(lambda: f64, tau: f64) -> [f64; 4] {
    let x = lambda * tau;
    // sin(kx)/x with its small-x limit
    let s = |k: f64| if x.abs() < 1e-300 { k } else { (k * x).sin() / x };
    [
        0.5 - s(2.0) / 20.0,
        0.3 + s(2.0) / 20.0,
        2.0 * (61.0 / 160.0 - 7.0 * s(2.0) / 80.0 - s(4.0) / 640.0),
        2.0 * (29.0 / 160.0 + s(2.0) / 80.0 - s(4.0) / 640.0),
    ]
}

pub fn imperfect_cz_budget(lambda: f64, tau: f64, rates: CzRates) -> Result<FidelityBudget> {
    if !(lambda > 0.0 && tau > 0.0 && lambda.is_finite() && tau.is_finite()) {
        return Err(Error::Validation(format!(
            "imperfect CZ needs positive λ and τ, got λ = {lambda}, τ = {tau}"
        )));
    }
    for r in rates.relaxation.iter().chain(&rates.dephasing) {
        if !(r.is_finite() && *r >= 0.0) {
            return Err(Error::Validation(format!("rates must be non-negative, got {r}")));
        }
    }
    let c = imperfect_cz_coefficients(lambda, tau);
    let specs = [
        ("relaxation_q1", ChannelKind::Relaxation, 0, rates.relaxation[0], 1.0),
        ("relaxation_q2", ChannelKind::Relaxation, 1, rates.relaxation[1], 1.0),
        ("dephasing_q1", ChannelKind::Dephasing, 0, rates.dephasing[0], 2.0),
        ("dephasing_q2", ChannelKind::Dephasing, 1, rates.dephasing[1], 2.0),
    ];
    let entries = specs
        .iter()
        .zip(c)
        .map(|(&(label, kind, site, rate, conv), coefficient)| BudgetEntry {
            label: label.to_string(),
            kind,
            site: Some(site),
            rate,
            rate_convention: conv,
            coefficient,
            contribution: coefficient * rate * tau,
            error_estimate: 0.0,
        })
        .collect();
    Ok(FidelityBudget::from_entries(
        entries,
        tau,
        tau,
        FirstOrderFormula::Projected,
    ))
}
