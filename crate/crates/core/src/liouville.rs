// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact open-system dynamics: a fixed-step RK4 integrator for the Lindblad
//! master equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_k κ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}),   κ_k = Γ_k · convention_k,
//! ```
//!
//! channel tomography on the computational dyads, and Haar-averaged gate
//! fidelities (exact two-design sum and Monte Carlo).

use std::sync::Arc;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{assemble_budget, BudgetOptions, NoiseChannel};
use crate::error::{Error, Result};
use crate::hilbert::{OperatorMatrix, SystemLayout};
use crate::linalg::{self, c, Mat, SparseOp, ONE};
use crate::propagator::{effective_target, HamiltonianSchedule};

/// Name of the Monte Carlo generator, recorded in reports.
pub const RNG_NAME: &str = "ChaCha20";

const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    layout: Arc<SystemLayout>,
    data: Mat,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity to 1e-10.
    pub fn new(layout: Arc<SystemLayout>, data: Mat) -> Result<Self> {
        let rho = Self::unchecked(layout, data)?;
        let herm = linalg::hermiticity_defect(&rho.data);
        if herm > STATE_TOL {
            return Err(Error::Validation(format!("density matrix not Hermitian (defect {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -STATE_TOL {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    fn unchecked(layout: Arc<SystemLayout>, data: Mat) -> Result<Self> {
        let n = layout.full_dim();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::Validation(format!(
                "density matrix is {}x{}, layout requires {n}x{n}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(DensityMatrix { layout, data })
    }

    /// |ψ⟩⟨ψ| for a full-space state vector, normalised.
    pub fn pure(layout: Arc<SystemLayout>, psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("state vector has zero or invalid norm".into()));
        }
        let v = psi / c(norm, 0.0);
        Self::new(layout, &v * v.adjoint())
    }

    /// Pure state from amplitudes on the computational basis.
    pub fn from_cmp_state(layout: Arc<SystemLayout>, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != layout.cmp_dim() {
            return Err(Error::Validation(format!(
                "{} amplitudes given, computational dimension is {}",
                amplitudes.len(),
                layout.cmp_dim()
            )));
        }
        let mut psi = DVector::zeros(layout.full_dim());
        for (&i, &a) in layout.cmp_indices().iter().zip(amplitudes) {
            psi[i] = a;
        }
        Self::pure(layout, &psi)
    }

    pub fn layout(&self) -> &Arc<SystemLayout> {
        &self.layout
    }

    pub fn data(&self) -> &Mat {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.data).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.data + self.data.adjoint()).scale(0.5);
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Target for the Richardson estimate of the global error, max-norm.
    pub tol: f64,
    /// Upper bound on (spectral spread of H) × step.
    pub spread_step: f64,
    /// Upper bound on κ_max × step.
    pub rate_step: f64,
    /// Step-halvings tried before giving up.
    pub max_refinements: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            spread_step: 0.05,
            rate_step: 1e-3,
            max_refinements: 10,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.tol) && ok(self.spread_step) && ok(self.rate_step)) {
            return Err(Error::Validation(
                "solver tolerance and step bounds must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub steps_per_segment: Vec<usize>,
    pub error_estimate: f64,
}

struct SegmentOps {
    // −iH − ½ Σ κ L†L
    effective: SparseOp,
    steps: usize,
    h: f64,
}

/// Master-equation propagator for one schedule and channel set, with its step
/// sizes calibrated by a Richardson probe.
pub struct LindbladSolver {
    layout: Arc<SystemLayout>,
    segments: Vec<SegmentOps>,
    jumps: Vec<(SparseOp, f64)>,
    report: SolverReport,
}

impl LindbladSolver {
    pub fn new(
        schedule: &HamiltonianSchedule,
        channels: &[NoiseChannel],
        options: &SolverOptions,
    ) -> Result<Self> {
        options.validate()?;
        let layout = schedule.layout().clone();
        let n = layout.full_dim();
        let mut damping = linalg::zeros(n);
        let mut jumps = Vec::new();
        let mut kappa_max = 0.0_f64;
        for ch in channels {
            if ch.jump.layout() != &layout {
                return Err(Error::Validation(format!(
                    "channel {}: jump operator layout differs from schedule layout",
                    ch.label
                )));
            }
            let kappa = ch.effective_rate();
            if kappa == 0.0 {
                continue;
            }
            let l = ch.jump.data();
            damping += (l.adjoint() * l).scale(kappa);
            kappa_max = kappa_max.max(kappa * linalg::max_abs(l).powi(2));
            jumps.push((SparseOp::from_dense(l), kappa));
        }
        let mut segments = Vec::with_capacity(schedule.segments().len());
        for seg in schedule.segments() {
            let spread = linalg::HermitianEigen::new(seg.generator.data()).spectral_spread();
            let eff = seg.generator.data().map(|z| z * c(0.0, -1.0)) - damping.scale(0.5);
            let by_spread = (seg.duration * spread / options.spread_step).ceil();
            let by_rate = (seg.duration * kappa_max / options.rate_step).ceil();
            let steps = by_spread.max(by_rate).max(1.0) as usize;
            segments.push(SegmentOps {
                effective: SparseOp::from_dense(&eff),
                steps,
                h: seg.duration / steps as f64,
            });
        }
        let mut solver = LindbladSolver {
            layout,
            segments,
            jumps,
            report: SolverReport {
                steps_per_segment: Vec::new(),
                error_estimate: 0.0,
            },
        };
        solver.calibrate(options)?;
        Ok(solver)
    }

    pub fn report(&self) -> &SolverReport {
        &self.report
    }

    fn set_refinement(&mut self, base: &[usize], factor: usize, schedule_durations: &[f64]) {
        for ((seg, &b), &dur) in self.segments.iter_mut().zip(base).zip(schedule_durations) {
            seg.steps = b * factor;
            seg.h = dur / seg.steps as f64;
        }
    }

    // Doubles the step counts until the Richardson estimate |ρ_N − ρ_2N|/15 on
    // a probe state with support on every computational coherence meets tol.
    fn calibrate(&mut self, options: &SolverOptions) -> Result<()> {
        let d = self.layout.cmp_dim();
        let amp = c(1.0 / (d as f64).sqrt(), 0.0);
        let probe = DensityMatrix::from_cmp_state(self.layout.clone(), &vec![amp; d])?.data;
        let base: Vec<usize> = self.segments.iter().map(|s| s.steps).collect();
        let durations: Vec<f64> = self.segments.iter().map(|s| s.h * s.steps as f64).collect();
        let mut factor = 1usize;
        let mut coarse = self.evolve_matrix(&probe);
        for _ in 0..=options.max_refinements {
            self.set_refinement(&base, 2 * factor, &durations);
            let fine = self.evolve_matrix(&probe);
            let est = linalg::max_abs_diff(&coarse, &fine) / 15.0;
            if est <= options.tol {
                self.report = SolverReport {
                    steps_per_segment: self.segments.iter().map(|s| s.steps).collect(),
                    error_estimate: est,
                };
                return Ok(());
            }
            coarse = fine;
            factor *= 2;
        }
        Err(Error::Solver(format!(
            "step-size refinement did not reach tolerance {:e} after {} halvings",
            options.tol, options.max_refinements
        )))
    }

    fn rhs(&self, seg: &SegmentOps, rho: &Mat, out: &mut Mat, scratch: &mut Mat) {
        scratch.fill(linalg::ZERO);
        seg.effective.mul_add(rho, ONE, scratch);
        out.copy_from(scratch);
        *out += scratch.adjoint();
        for (l, kappa) in &self.jumps {
            scratch.fill(linalg::ZERO);
            l.mul_add(rho, ONE, scratch);
            l.mul_adjoint_add(scratch, c(*kappa, 0.0), out);
        }
    }

    /// Propagates a Hermitian matrix over the whole schedule. Linear in the
    /// input, so it also serves for traceless or indefinite operators.
    pub fn evolve_matrix(&self, rho0: &Mat) -> Mat {
        let n = rho0.nrows();
        let mut rho = rho0.clone();
        let mut k1 = Mat::zeros(n, n);
        let mut k2 = Mat::zeros(n, n);
        let mut k3 = Mat::zeros(n, n);
        let mut k4 = Mat::zeros(n, n);
        let mut tmp = Mat::zeros(n, n);
        let mut scratch = Mat::zeros(n, n);
        for seg in &self.segments {
            let h = seg.h;
            let hc = c(h, 0.0);
            for _ in 0..seg.steps {
                self.rhs(seg, &rho, &mut k1, &mut scratch);
                tmp.copy_from(&rho);
                linalg::axpy(&mut tmp, hc * 0.5, &k1);
                self.rhs(seg, &tmp, &mut k2, &mut scratch);
                tmp.copy_from(&rho);
                linalg::axpy(&mut tmp, hc * 0.5, &k2);
                self.rhs(seg, &tmp, &mut k3, &mut scratch);
                tmp.copy_from(&rho);
                linalg::axpy(&mut tmp, hc, &k3);
                self.rhs(seg, &tmp, &mut k4, &mut scratch);
                k2 += &k3;
                linalg::axpy(&mut k1, c(2.0, 0.0), &k2);
                k1 += &k4;
                linalg::axpy(&mut rho, hc / 6.0, &k1);
            }
        }
        rho
    }
}

/// ρ(τ) for a Hermitian initial state.
pub fn lindblad_evolve(
    rho0: &DensityMatrix,
    schedule: &HamiltonianSchedule,
    channels: &[NoiseChannel],
    options: &SolverOptions,
) -> Result<DensityMatrix> {
    if rho0.layout() != schedule.layout() {
        return Err(Error::Validation("state layout differs from schedule layout".into()));
    }
    let solver = LindbladSolver::new(schedule, channels, options)?;
    let out = solver.evolve_matrix(rho0.data());
    check_finite(&out)?;
    DensityMatrix::unchecked(schedule.layout().clone(), out)
}

fn check_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Solver("non-finite entries in the evolved state".into()))
    }
}

/// Images E(|i⟩⟨j|) of the computational dyads under the noisy gate.
#[derive(Debug, Clone)]
pub struct ChannelTomogram {
    layout: Arc<SystemLayout>,
    images: Vec<Mat>,
    pub solver: Option<SolverReport>,
}

impl ChannelTomogram {
    /// Builds a tomogram from an explicit map (i, j) ↦ E(|i⟩⟨j|).
    pub fn from_fn<F>(layout: Arc<SystemLayout>, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Mat,
    {
        let d = layout.cmp_dim();
        let n = layout.full_dim();
        let mut images = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let m = f(i, j);
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::Validation(format!(
                        "image of |{i}⟩⟨{j}| is {}x{}, expected {n}x{n}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                images.push(m);
            }
        }
        Ok(ChannelTomogram {
            layout,
            images,
            solver: None,
        })
    }

    pub fn layout(&self) -> &Arc<SystemLayout> {
        &self.layout
    }

    /// E(|i⟩⟨j|), indices over the computational basis.
    pub fn image(&self, i: usize, j: usize) -> &Mat {
        &self.images[i * self.layout.cmp_dim() + j]
    }

    /// max ‖E(|i⟩⟨j|)† − E(|j⟩⟨i|)‖_max.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.layout.cmp_dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max(linalg::max_abs_diff(&self.image(i, j).adjoint(), self.image(j, i)));
            }
        }
        worst
    }

    /// E(X) for a computational-subspace operator X given as a d × d matrix.
    pub fn apply(&self, x: &Mat) -> Result<Mat> {
        let d = self.layout.cmp_dim();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::Validation(format!("operator must be {d}x{d}")));
        }
        let n = self.layout.full_dim();
        let mut out = Mat::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                let a = x[(i, j)];
                if a != linalg::ZERO {
                    linalg::axpy(&mut out, a, self.image(i, j));
                }
            }
        }
        Ok(out)
    }

    /// P U_g† E(|i⟩⟨j|) U_g P for every dyad, as d × d matrices.
    fn rotated_images(&self, ug: &OperatorMatrix) -> Result<Vec<Mat>> {
        if ug.layout() != &self.layout {
            return Err(Error::Validation("target gate layout differs from tomogram layout".into()));
        }
        let a = ug.data() * self.layout.cmp_isometry();
        let ad = a.adjoint();
        Ok(self.images.iter().map(|e| &ad * e * &a).collect())
    }
}

/// Evolves every computational dyad. Off-diagonal dyads are obtained from
/// their Hermitian parts (|i⟩⟨j| + |j⟩⟨i|)/2 and i(|i⟩⟨j| − |j⟩⟨i|)/2, so the
/// integrator only sees Hermitian inputs.
pub fn channel_tomography(
    schedule: &HamiltonianSchedule,
    channels: &[NoiseChannel],
    options: &SolverOptions,
) -> Result<ChannelTomogram> {
    let solver = LindbladSolver::new(schedule, channels, options)?;
    let layout = schedule.layout().clone();
    let d = layout.cmp_dim();
    let n = layout.full_dim();
    let idx = layout.cmp_indices().to_vec();
    let half = c(0.5, 0.0);
    let ihalf = c(0.0, 0.5);

    // (i, j, symmetric?) for i ≤ j
    let jobs: Vec<(usize, usize, bool)> = (0..d)
        .flat_map(|i| {
            (i..d).flat_map(move |j| {
                if i == j {
                    vec![(i, j, true)]
                } else {
                    vec![(i, j, true), (i, j, false)]
                }
            })
        })
        .collect();
    let results: Vec<Mat> = jobs
        .par_iter()
        .map(|&(i, j, sym)| {
            let mut x = Mat::zeros(n, n);
            let (a, b) = (idx[i], idx[j]);
            if i == j {
                x[(a, a)] = ONE;
            } else if sym {
                x[(a, b)] = half;
                x[(b, a)] = half;
            } else {
                x[(a, b)] = ihalf;
                x[(b, a)] = -ihalf;
            }
            solver.evolve_matrix(&x)
        })
        .collect();
    for m in &results {
        check_finite(m)?;
    }

    let mut images = vec![Mat::zeros(0, 0); d * d];
    let mut it = jobs.iter().zip(results);
    while let Some((&(i, j, _), ea)) = it.next() {
        if i == j {
            images[i * d + i] = ea;
            continue;
        }
        let (_, eb) = it.next().expect("antisymmetric partner follows symmetric job");
        let ieb = eb.map(|z| z * linalg::I);
        images[i * d + j] = &ea - &ieb;
        images[j * d + i] = ea + ieb;
    }
    Ok(ChannelTomogram {
        layout,
        images,
        solver: Some(solver.report().clone()),
    })
}

/// Exact Haar average via the second-moment identity:
/// F̄ = [Σ_{i,k} ⟨k|E′(|i⟩⟨i|)|k⟩ + Σ_{i,j} ⟨i|E′(|i⟩⟨j|)|j⟩] / (d(d+1)),
/// with E′(X) = P U_g† E(X) U_g P.
pub fn haar_average_fidelity(tomogram: &ChannelTomogram, ug: &OperatorMatrix) -> Result<f64> {
    let d = tomogram.layout.cmp_dim();
    let rot = tomogram.rotated_images(ug)?;
    let mut acc = linalg::ZERO;
    for i in 0..d {
        acc += linalg::trace(&rot[i * d + i]);
        for j in 0..d {
            acc += rot[i * d + j][(i, j)];
        }
    }
    let f = acc / c((d * (d + 1)) as f64, 0.0);
    if f.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "average fidelity has imaginary part {:e}",
            f.im
        )));
    }
    Ok(f.re)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub rng: String,
}

/// Monte Carlo average of ⟨ψ|U_g† E(|ψ⟩⟨ψ|) U_g|ψ⟩ over Haar-random
/// computational states (normalised complex Gaussian vectors). E(|ψ⟩⟨ψ|) is
/// assembled from the tomogram by linearity.
pub fn haar_mc_fidelity(
    tomogram: &ChannelTomogram,
    ug: &OperatorMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples < 100 {
        return Err(Error::Validation(format!(
            "Monte Carlo needs at least 100 samples, got {n_samples}"
        )));
    }
    let d = tomogram.layout.cmp_dim();
    let rot = tomogram.rotated_images(ug)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let states: Vec<Vec<Complex64>> = (0..n_samples)
        .map(|_| {
            let mut v: Vec<Complex64> = (0..d)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    c(re, im)
                })
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            v
        })
        .collect();
    let samples: Vec<f64> = states
        .par_iter()
        .map(|psi| {
            let mut acc = linalg::ZERO;
            for i in 0..d {
                for j in 0..d {
                    let w = psi[i] * psi[j].conj();
                    if w == linalg::ZERO {
                        continue;
                    }
                    let m = &rot[i * d + j];
                    let mut q = linalg::ZERO;
                    for a in 0..d {
                        for b in 0..d {
                            q += psi[a].conj() * m[(a, b)] * psi[b];
                        }
                    }
                    acc += w * q;
                }
            }
            acc.re
        })
        .collect();
    let n = n_samples as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        n_samples,
        seed,
        rng: RNG_NAME.to_string(),
    })
}

/// Tomography followed by the two-design average against the schedule's
/// effective target (its ideal gate with the declared phases fitted).
pub fn oracle_fidelity(
    schedule: &HamiltonianSchedule,
    channels: &[NoiseChannel],
    options: &SolverOptions,
) -> Result<f64> {
    let tomo = channel_tomography(schedule, channels, options)?;
    haar_average_fidelity(&tomo, &effective_target(schedule)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub scales: Vec<f64>,
    pub analytic: Vec<f64>,
    pub oracle: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Fitted exponent of |F̄_oracle − F̄_analytic| against the scale.
    pub slope: Option<f64>,
    pub inconclusive: bool,
    pub noise_floor: f64,
}

/// Largest Γτ accepted by [`residual_scaling_check`].
pub const SCALING_MAX_GAMMA_TAU: f64 = 0.05;

/// Multiplies every rate by each scale, compares the oracle with the
/// first-order budget and fits log|residual| against log(scale).
pub fn residual_scaling_check(
    schedule: &HamiltonianSchedule,
    channels: &[NoiseChannel],
    ug: &OperatorMatrix,
    scales: &[f64],
    budget_options: &BudgetOptions,
    solver_options: &SolverOptions,
) -> Result<ScalingCheck> {
    if scales.len() < 3 {
        return Err(Error::Validation(format!(
            "scaling check needs at least 3 scales, got {}",
            scales.len()
        )));
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::Validation("scales must be positive".into()));
    }
    let smax = scales.iter().copied().fold(0.0, f64::max);
    let smin = scales.iter().copied().fold(f64::INFINITY, f64::min);
    if smax <= smin {
        return Err(Error::Validation("scales must not all be equal".into()));
    }
    let tau = schedule.reference_time();
    for ch in channels {
        if ch.rate * tau * smax > SCALING_MAX_GAMMA_TAU {
            return Err(Error::Validation(format!(
                "channel {}: Γτ = {:e} at the largest scale exceeds {SCALING_MAX_GAMMA_TAU}",
                ch.label,
                ch.rate * tau * smax
            )));
        }
    }
    let budget = assemble_budget(schedule, channels, budget_options)?;
    let base_loss = budget.infidelity();
    let mut analytic = Vec::with_capacity(scales.len());
    let mut oracle = Vec::with_capacity(scales.len());
    let mut residuals = Vec::with_capacity(scales.len());
    let mut solver_err = 0.0_f64;
    for &s in scales {
        let scaled: Vec<NoiseChannel> = channels
            .iter()
            .map(|ch| ch.with_rate(ch.rate * s))
            .collect::<Result<_>>()?;
        let tomo = channel_tomography(schedule, &scaled, solver_options)?;
        if let Some(r) = &tomo.solver {
            solver_err = solver_err.max(r.error_estimate);
        }
        let fo = haar_average_fidelity(&tomo, ug)?;
        let fa = 1.0 - s * base_loss;
        analytic.push(fa);
        oracle.push(fo);
        residuals.push(fo - fa);
    }
    let d = schedule.layout().cmp_dim() as f64;
    let noise_floor = 100.0 * (d * solver_err + smax * budget.quadrature_error_estimate) + 1e-13;
    let inconclusive = residuals.iter().any(|r| r.abs() <= noise_floor);
    let slope = if inconclusive {
        None
    } else {
        let xs: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
        let ys: Vec<f64> = residuals.iter().map(|r| r.abs().ln()).collect();
        Some(least_squares_slope(&xs, &ys))
    };
    Ok(ScalingCheck {
        scales: scales.to_vec(),
        analytic,
        oracle,
        residuals,
        slope,
        inconclusive,
        noise_floor,
    })
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ChannelKind;
    use crate::propagator::idle_schedule;

    fn qubit() -> Arc<SystemLayout> {
        Arc::new(SystemLayout::qubits(1).unwrap())
    }

    #[test]
    fn amplitude_decay_matches_exponential() {
        let layout = qubit();
        let s = idle_schedule(layout.clone(), 2.0).unwrap();
        let l = OperatorMatrix::new(layout.clone(), linalg::dyad(2, 0, 1)).unwrap();
        let ch = NoiseChannel::new("r", ChannelKind::Relaxation, Some(0), l, 0.7, 1.0).unwrap();
        let rho0 = DensityMatrix::from_cmp_state(layout, &[linalg::ZERO, ONE]).unwrap();
        let out = lindblad_evolve(&rho0, &s, &[ch], &SolverOptions::default()).unwrap();
        assert!((out.data()[(1, 1)].re - (-1.4f64).exp()).abs() < 1e-8);
        assert!((out.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dephasing_convention_half_gives_coherence_rate() {
        let layout = qubit();
        let s = idle_schedule(layout.clone(), 1.0).unwrap();
        let z = OperatorMatrix::new(layout.clone(), crate::hilbert::pauli(3)).unwrap();
        let ch = NoiseChannel::new("z", ChannelKind::Dephasing, Some(0), z, 0.3, 0.5).unwrap();
        let a = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho0 = DensityMatrix::from_cmp_state(layout, &[a, a]).unwrap();
        let out = lindblad_evolve(&rho0, &s, &[ch], &SolverOptions::default()).unwrap();
        assert!((out.data()[(0, 1)].re - 0.5 * (-0.3f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn depolarizing_substitute_two_design_value() {
        let layout = Arc::new(SystemLayout::qubits(2).unwrap());
        let d = 4;
        let tomo = ChannelTomogram::from_fn(layout.clone(), |i, j| {
            if i == j {
                linalg::identity(d).scale(1.0 / d as f64)
            } else {
                linalg::zeros(d)
            }
        })
        .unwrap();
        let f = haar_average_fidelity(&tomo, &OperatorMatrix::identity(layout)).unwrap();
        assert!((f - 1.0 / d as f64).abs() < 1e-14);
    }

    #[test]
    fn density_matrix_validation() {
        let layout = qubit();
        assert!(DensityMatrix::new(layout.clone(), linalg::identity(2)).is_err());
        assert!(DensityMatrix::new(layout.clone(), linalg::identity(2).scale(0.5)).is_ok());
        let bad = Mat::from_row_slice(2, 2, &[c(1.5, 0.0), linalg::ZERO, linalg::ZERO, c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(layout, bad).is_err());
    }

    #[test]
    fn slope_fit() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 5.0];
        assert!((least_squares_slope(&x, &y) - 2.0).abs() < 1e-15);
    }
}
