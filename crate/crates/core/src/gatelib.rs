// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Builtin gate schedules and their noise models: the transmon CZ, the
//! two-pulse Rydberg CZ, the three-qubit CCZS, an in-subspace iSWAP, idling
//! registers, and parallel composition of any of these.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;

use crate::analytic::{
    assemble_budget, BudgetOptions, ChannelKind, FidelityBudget, NoiseChannel, ParallelContext,
};
use crate::error::{Error, Result};
use crate::hilbert::{embed, embed_block, OperatorMatrix, SystemLayout};
use crate::linalg::{self, c, Mat, ONE, ZERO};
use crate::propagator::{embed_cmp_gate, HamiltonianSchedule, PhaseConvention, Segment};

/// Names accepted by [`crate::cli`] and the FFI.
pub const BUILTIN_MODELS: [&str; 5] = ["cz", "rydberg_cz", "cczs", "iswap", "parallel"];

/// Rydberg CZ operating point (Δ/Ω ≈ 0.377371, ξ ≈ 3.90242), solved to double
/// precision for closure of |01⟩ and φ₁₁ = 2φ₀₁ − π.
pub const RYDBERG_DELTA_OVER_OMEGA: f64 = 0.377_370_923_015_870;
pub const RYDBERG_XI: f64 = 3.902_422_315_670_971;

/// Levels of a Rydberg atom.
pub mod rydberg_level {
    pub const ZERO: usize = 0;
    pub const ONE: usize = 1;
    pub const R: usize = 2;
    pub const SINK: usize = 3;
}

/// One constituent of a parallel composition.
#[derive(Debug, Clone)]
pub struct ParallelPart {
    pub first_site: usize,
    /// The constituent model, padded to the common duration.
    pub model: GateModel,
}

#[derive(Debug, Clone)]
pub struct GateModel {
    pub name: String,
    pub schedule: HamiltonianSchedule,
    /// Channel templates; rates are zero unless set by the builder.
    pub channels: Vec<NoiseChannel>,
    pub parameters: BTreeMap<String, f64>,
    pub parts: Vec<ParallelPart>,
}

impl GateModel {
    pub fn layout(&self) -> &Arc<SystemLayout> {
        self.schedule.layout()
    }

    pub fn ideal_gate(&self) -> &OperatorMatrix {
        self.schedule.target_gate()
    }

    pub fn phase_convention(&self) -> PhaseConvention {
        self.schedule.phase_convention()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.channels.iter().map(|c| c.label.as_str()).collect()
    }

    /// Channel templates with the given rates, in channel order.
    pub fn channels_with_rates(&self, rates: &[f64]) -> Result<Vec<NoiseChannel>> {
        if rates.len() != self.channels.len() {
            return Err(Error::Validation(format!(
                "model {} has {} channels, {} rates given",
                self.name,
                self.channels.len(),
                rates.len()
            )));
        }
        self.channels
            .iter()
            .zip(rates)
            .map(|(ch, &r)| ch.with_rate(r))
            .collect()
    }

    /// Every channel at the same Γτ (τ the reference time).
    pub fn channels_at_gamma_tau(&self, gamma_tau: f64) -> Result<Vec<NoiseChannel>> {
        let rate = gamma_tau / self.schedule.reference_time();
        self.channels_with_rates(&vec![rate; self.channels.len()])
    }

    fn with_parameter(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }
}

fn ket_bra(layout: &Arc<SystemLayout>, terms: &[(Complex64, &[usize], &[usize])]) -> Result<Mat> {
    Ok(OperatorMatrix::from_outer_products(layout.clone(), terms)?.into_data())
}

fn hermitian_plus_conjugate(m: Mat) -> Mat {
    let adj = m.adjoint();
    m + adj
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be positive and finite, got {v}")))
    }
}

fn single_segment(
    layout: &Arc<SystemLayout>,
    h: Mat,
    tau: f64,
    target: OperatorMatrix,
    convention: PhaseConvention,
) -> Result<HamiltonianSchedule> {
    HamiltonianSchedule::new(
        layout.clone(),
        vec![Segment {
            generator: OperatorMatrix::new(layout.clone(), h)?,
            duration: tau,
        }],
        target,
        convention,
    )
}

fn diag_gate(entries: &[Complex64]) -> Mat {
    Mat::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

/// Transmon CZ: H = λ(|11⟩⟨20| + |20⟩⟨11|) on two three-level transmons,
/// applied for time τ. λτ = π realises CZ; other values give coherent errors.
pub fn transmon_cz(lambda: f64, tau: f64) -> Result<GateModel> {
    check_positive("lambda", lambda)?;
    check_positive("tau", tau)?;
    let layout = Arc::new(SystemLayout::compose(&[3, 3], None)?);
    let h = hermitian_plus_conjugate(ket_bra(&layout, &[(c(lambda, 0.0), &[1, 1], &[2, 0])])?);
    let cz = diag_gate(&[ONE, ONE, ONE, -ONE]);
    let target = embed_cmp_gate(&layout, &cz)?;
    let schedule = single_segment(&layout, h, tau, target, PhaseConvention::None)?;
    let channels = transmon_noise(&layout, &[0.0, 0.0], &[0.0, 0.0])?;
    Ok(GateModel {
        name: "cz".into(),
        schedule,
        channels,
        parameters: BTreeMap::new(),
        parts: Vec::new(),
    }
    .with_parameter("lambda", lambda)
    .with_parameter("tau", tau))
}

/// Σ √j |j−1⟩⟨j|
pub fn lowering(levels: usize) -> Mat {
    let mut m = linalg::zeros(levels);
    for j in 1..levels {
        m[(j - 1, j)] = c((j as f64).sqrt(), 0.0);
    }
    m
}

/// Σ j |j⟩⟨j|
pub fn number(levels: usize) -> Mat {
    Mat::from_fn(levels, levels, |i, j| if i == j { c(i as f64, 0.0) } else { ZERO })
}

/// diag(1, −1, 0, …): σ_z on levels 0 and 1.
pub fn sigma_z(levels: usize) -> Mat {
    let mut m = linalg::zeros(levels);
    m[(0, 0)] = ONE;
    m[(1, 1)] = -ONE;
    m
}

/// Relaxation and dephasing on every subsystem; all relaxation channels come
/// first, then all dephasing channels, each in subsystem order.
///
/// Subsystems with three or more levels get the transmon ladder operator
/// (convention 1) and Σ j|j⟩⟨j| (convention 2). Two-level subsystems get σ⁻
/// (convention 1) and σ_z (convention 1/2). With these conventions Γ_φ is the
/// decay rate of the 0–1 coherence in both cases.
pub fn transmon_noise(
    layout: &Arc<SystemLayout>,
    relaxation: &[f64],
    dephasing: &[f64],
) -> Result<Vec<NoiseChannel>> {
    let n = layout.n_subsystems();
    if relaxation.len() != n || dephasing.len() != n {
        return Err(Error::Validation(format!(
            "expected {n} relaxation and dephasing rates, got {} and {}",
            relaxation.len(),
            dephasing.len()
        )));
    }
    let mut out = Vec::with_capacity(2 * n);
    for (site, &rate) in relaxation.iter().enumerate() {
        let levels = layout.dims()[site];
        out.push(NoiseChannel::new(
            format!("relaxation_q{}", site + 1),
            ChannelKind::Relaxation,
            Some(site),
            embed(&lowering(levels), site, layout)?,
            rate,
            1.0,
        )?);
    }
    for (site, &rate) in dephasing.iter().enumerate() {
        let levels = layout.dims()[site];
        let (op, conv) = if levels >= 3 {
            (number(levels), 2.0)
        } else {
            (sigma_z(levels), 0.5)
        };
        out.push(NoiseChannel::new(
            format!("dephasing_q{}", site + 1),
            ChannelKind::Dephasing,
            Some(site),
            embed(&op, site, layout)?,
            rate,
            conv,
        )?);
    }
    Ok(out)
}

/// Qubit-style noise regardless of level count: σ⁻₀₁ (convention 1) and
/// σ_z on levels 0, 1 (convention 1/2).
pub fn qubit_noise(
    layout: &Arc<SystemLayout>,
    relaxation: &[f64],
    dephasing: &[f64],
) -> Result<Vec<NoiseChannel>> {
    let n = layout.n_subsystems();
    if relaxation.len() != n || dephasing.len() != n {
        return Err(Error::Validation(format!(
            "expected {n} relaxation and dephasing rates, got {} and {}",
            relaxation.len(),
            dephasing.len()
        )));
    }
    let mut out = Vec::with_capacity(2 * n);
    for (site, &rate) in relaxation.iter().enumerate() {
        let levels = layout.dims()[site];
        out.push(NoiseChannel::new(
            format!("relaxation_q{}", site + 1),
            ChannelKind::Relaxation,
            Some(site),
            embed(&linalg::dyad(levels, 0, 1), site, layout)?,
            rate,
            1.0,
        )?);
    }
    for (site, &rate) in dephasing.iter().enumerate() {
        let levels = layout.dims()[site];
        out.push(NoiseChannel::new(
            format!("dephasing_q{}", site + 1),
            ChannelKind::Dephasing,
            Some(site),
            embed(&sigma_z(levels), site, layout)?,
            rate,
            0.5,
        )?);
    }
    Ok(out)
}

/// Single-pulse duration 2π/√(Δ² + 2Ω²) of the Rydberg protocol.
pub fn rydberg_pulse_time(omega: f64, delta: f64) -> f64 {
    2.0 * PI / (delta * delta + 2.0 * omega * omega).sqrt()
}

fn rydberg_hamiltonian(layout: &Arc<SystemLayout>, omega: Complex64, delta: f64) -> Result<Mat> {
    use rydberg_level::{ONE as L1, R, ZERO as L0};
    let half = 0.5;
    let o = omega * half;
    let d = c(-delta, 0.0);
    let dw = c(-0.5 * delta, 0.0);
    // single-excitation sectors |0⟩⊗{1, r} and {1, r}⊗|0⟩
    let couplings = ket_bra(
        layout,
        &[
            (o, &[L0, L1], &[L0, R]),
            (o, &[L1, L0], &[R, L0]),
            // |11⟩ ↔ |W⟩ with |W⟩ = (|r1⟩ + |1r⟩)/√2, strength √2Ω/2
            (o, &[L1, L1], &[R, L1]),
            (o, &[L1, L1], &[L1, R]),
        ],
    )?;
    let detunings = ket_bra(
        layout,
        &[
            (d, &[L0, R], &[L0, R]),
            (d, &[R, L0], &[R, L0]),
            // −Δ|W⟩⟨W|
            (dw, &[R, L1], &[R, L1]),
            (dw, &[R, L1], &[L1, R]),
            (dw, &[L1, R], &[R, L1]),
            (dw, &[L1, R], &[L1, R]),
        ],
    )?;
    Ok(hermitian_plus_conjugate(couplings) + detunings)
}

/// Two-pulse Rydberg-blockade CZ on atoms with levels 0, 1, r and a sink O.
///
/// The blockade is built into the Hamiltonian: |11⟩ couples only to the
/// symmetric |W⟩ and |rr⟩ is never addressed. The second pulse has Rabi
/// frequency Ωe^{iξ}. The target is CZ up to single-qubit Z phases, and
/// budget contributions are expressed in units of the single-pulse time.
pub fn rydberg_cz(omega: f64, delta: f64, xi: f64) -> Result<GateModel> {
    check_positive("omega", omega)?;
    if !delta.is_finite() || !xi.is_finite() {
        return Err(Error::Validation("delta and xi must be finite".into()));
    }
    let layout = Arc::new(SystemLayout::compose(&[4, 4], None)?);
    let tau = rydberg_pulse_time(omega, delta);
    let h1 = rydberg_hamiltonian(&layout, c(omega, 0.0), delta)?;
    let h2 = rydberg_hamiltonian(&layout, Complex64::from_polar(omega, xi), delta)?;
    let cz = diag_gate(&[ONE, ONE, ONE, -ONE]);
    let target = embed_cmp_gate(&layout, &cz)?;
    let schedule = HamiltonianSchedule::new(
        layout.clone(),
        vec![
            Segment {
                generator: OperatorMatrix::new(layout.clone(), h1)?,
                duration: tau,
            },
            Segment {
                generator: OperatorMatrix::new(layout.clone(), h2)?,
                duration: tau,
            },
        ],
        target,
        PhaseConvention::LocalZ,
    )?
    .with_reference_time(tau)?;
    let channels = rydberg_noise(&layout, &[0.0, 0.0])?;
    Ok(GateModel {
        name: "rydberg_cz".into(),
        schedule,
        channels,
        parameters: BTreeMap::new(),
        parts: Vec::new(),
    }
    .with_parameter("omega", omega)
    .with_parameter("delta", delta)
    .with_parameter("xi", xi)
    .with_parameter("tau", tau))
}

/// Rydberg CZ at the operating point [`RYDBERG_DELTA_OVER_OMEGA`], [`RYDBERG_XI`].
pub fn rydberg_cz_default(omega: f64) -> Result<GateModel> {
    rydberg_cz(omega, RYDBERG_DELTA_OVER_OMEGA * omega, RYDBERG_XI)
}

/// Decay |O⟩⟨r| on each atom, convention 1.
pub fn rydberg_noise(layout: &Arc<SystemLayout>, rates: &[f64]) -> Result<Vec<NoiseChannel>> {
    if rates.len() != layout.n_subsystems() {
        return Err(Error::Validation(format!(
            "expected {} decay rates, got {}",
            layout.n_subsystems(),
            rates.len()
        )));
    }
    rates
        .iter()
        .enumerate()
        .map(|(site, &rate)| {
            let levels = layout.dims()[site];
            if levels < 4 {
                return Err(Error::Validation(format!(
                    "subsystem {site}: Rydberg decay needs 4 levels, found {levels}"
                )));
            }
            NoiseChannel::new(
                format!("decay_q{}", site + 1),
                ChannelKind::Decay,
                Some(site),
                embed(&linalg::dyad(levels, rydberg_level::SINK, rydberg_level::R), site, layout)?,
                rate,
                1.0,
            )
        })
        .collect()
}

/// CCZS gate time π/(√2 λ).
pub fn cczs_time(lambda: f64) -> f64 {
    PI / (SQRT_2 * lambda)
}

/// Three-qubit CCZS from simultaneous CZ-type couplings q1–q2 and q1–q3 with
/// λ₁ = λ, λ₂ = −λe^{iφ}, no detuning, applied for π/(√2 λ).
///
/// On |1⟩⊗(q2 q3) the result swaps q2 and q3 with phases,
/// |110⟩ → e^{iφ}|101⟩ and |101⟩ → e^{−iφ}|110⟩, and flips the sign of |111⟩.
pub fn cczs(lambda: f64, phi: f64) -> Result<GateModel> {
    check_positive("lambda", lambda)?;
    if !phi.is_finite() {
        return Err(Error::Validation("phi must be finite".into()));
    }
    let layout = Arc::new(SystemLayout::compose(&[3, 3, 3], None)?);
    let l1 = c(lambda, 0.0);
    let l2 = -Complex64::from_polar(lambda, phi);
    let h = hermitian_plus_conjugate(ket_bra(
        &layout,
        &[
            (l1, &[1, 1, 0], &[2, 0, 0]),
            (l1, &[1, 1, 1], &[2, 0, 1]),
            (l2, &[1, 0, 1], &[2, 0, 0]),
            (l2, &[1, 1, 1], &[2, 1, 0]),
        ],
    )?);
    let tau = cczs_time(lambda);
    let e = Complex64::from_polar(1.0, phi);
    let mut czs = linalg::zeros(4);
    czs[(0, 0)] = ONE;
    czs[(1, 2)] = e;
    czs[(2, 1)] = e.conj();
    czs[(3, 3)] = -ONE;
    let gate = linalg::kron(&linalg::dyad(2, 0, 0), &linalg::identity(4))
        + linalg::kron(&linalg::dyad(2, 1, 1), &czs);
    let target = embed_cmp_gate(&layout, &gate)?;
    let schedule = single_segment(&layout, h, tau, target, PhaseConvention::None)?;
    let channels = cczs_noise(&layout, &[0.0; 3], &[0.0; 3])?;
    Ok(GateModel {
        name: "cczs".into(),
        schedule,
        channels,
        parameters: BTreeMap::new(),
        parts: Vec::new(),
    }
    .with_parameter("lambda", lambda)
    .with_parameter("phi", phi)
    .with_parameter("tau", tau))
}

/// Transmon operators on q1; σ⁻₀₁ and σ_z (convention 1/2) on q2 and q3,
/// whose second excited level is never populated by the gate.
pub fn cczs_noise(
    layout: &Arc<SystemLayout>,
    relaxation: &[f64],
    dephasing: &[f64],
) -> Result<Vec<NoiseChannel>> {
    if layout.n_subsystems() != 3 {
        return Err(Error::Validation("CCZS noise needs three subsystems".into()));
    }
    let mut transmon = transmon_noise(layout, relaxation, dephasing)?;
    let qubit = qubit_noise(layout, relaxation, dephasing)?;
    for k in [1, 2, 4, 5] {
        transmon[k] = qubit[k].clone();
    }
    Ok(transmon)
}

/// In-subspace iSWAP: H = −g(|01⟩⟨10| + |10⟩⟨01|), so that gτ = π/2 maps
/// |01⟩ → i|10⟩ and |10⟩ → i|01⟩.
pub fn iswap(g: f64, tau: f64) -> Result<GateModel> {
    check_positive("g", g)?;
    check_positive("tau", tau)?;
    let layout = Arc::new(SystemLayout::qubits(2)?);
    let h = hermitian_plus_conjugate(ket_bra(&layout, &[(c(-g, 0.0), &[0, 1], &[1, 0])])?);
    let mut gate = linalg::zeros(4);
    gate[(0, 0)] = ONE;
    gate[(1, 2)] = linalg::I;
    gate[(2, 1)] = linalg::I;
    gate[(3, 3)] = ONE;
    let target = embed_cmp_gate(&layout, &gate)?;
    let schedule = single_segment(&layout, h, tau, target, PhaseConvention::None)?;
    let channels = qubit_noise(&layout, &[0.0; 2], &[0.0; 2])?;
    Ok(GateModel {
        name: "iswap".into(),
        schedule,
        channels,
        parameters: BTreeMap::new(),
        parts: Vec::new(),
    }
    .with_parameter("g", g)
    .with_parameter("tau", tau))
}

/// Zero-Hamiltonian register with the given subsystem dimensions.
pub fn idle(dims: &[usize], tau: f64) -> Result<GateModel> {
    check_positive("tau", tau)?;
    let layout = Arc::new(SystemLayout::compose(dims, None)?);
    let schedule = crate::propagator::idle_schedule(layout.clone(), tau)?;
    let n = dims.len();
    let channels = transmon_noise(&layout, &vec![0.0; n], &vec![0.0; n])?;
    Ok(GateModel {
        name: "idle".into(),
        schedule,
        channels,
        parameters: BTreeMap::new(),
        parts: Vec::new(),
    }
    .with_parameter("tau", tau))
}

fn combined_convention(models: &[GateModel]) -> PhaseConvention {
    let mut out = PhaseConvention::None;
    for m in models {
        out = match (out, m.phase_convention()) {
            (PhaseConvention::LocalZ, _) | (_, PhaseConvention::LocalZ) => PhaseConvention::LocalZ,
            (PhaseConvention::Global, _) | (_, PhaseConvention::Global) => PhaseConvention::Global,
            _ => PhaseConvention::None,
        };
    }
    out
}

fn relabel(label: &str, site: Option<usize>, offset: usize, part: usize) -> String {
    match (site, label.rfind("_q")) {
        (Some(s), Some(pos)) => format!("{}_q{}", &label[..pos], s + offset + 1),
        _ => format!("g{}_{label}", part + 1),
    }
}

/// Extends a schedule with an idle segment up to `total`.
fn pad_schedule(model: &GateModel, total: f64) -> Result<GateModel> {
    let s = &model.schedule;
    let missing = total - s.tau_total();
    if missing <= 1e-12 * total {
        return Ok(model.clone());
    }
    let mut segments = s.segments().to_vec();
    segments.push(Segment {
        generator: OperatorMatrix::zeros(s.layout().clone()),
        duration: missing,
    });
    let schedule = HamiltonianSchedule::new(
        s.layout().clone(),
        segments,
        s.target_gate().clone(),
        s.phase_convention(),
    )?;
    Ok(GateModel {
        schedule,
        ..model.clone()
    })
}

/// Runs `models` simultaneously on disjoint registers (tensor order as given).
///
/// Shorter schedules are padded with idle time when `pad` is set; otherwise
/// durations must agree. Segment boundaries of all constituents are merged,
/// each merged interval carrying the Kronecker sum of the active generators.
pub fn parallel(models: &[GateModel], pad: bool) -> Result<GateModel> {
    match models.len() {
        0 => return Err(Error::Validation("parallel composition of zero models".into())),
        1 => return Ok(models[0].clone()),
        _ => {}
    }
    let total = models
        .iter()
        .map(|m| m.schedule.tau_total())
        .fold(0.0, f64::max);
    for m in models {
        let dur = m.schedule.tau_total();
        if !pad && (dur - total).abs() > 1e-12 * total {
            return Err(Error::Validation(format!(
                "model {} lasts {dur:e} s, expected {total:e} s; enable padding to idle the shorter gates",
                m.name
            )));
        }
    }
    let padded: Vec<GateModel> = models
        .iter()
        .map(|m| pad_schedule(m, total))
        .collect::<Result<_>>()?;

    let mut layout: SystemLayout = (**padded[0].layout()).clone();
    for m in &padded[1..] {
        layout = layout.concat(m.layout())?;
    }
    let layout = Arc::new(layout);

    let mut bounds: Vec<f64> = padded
        .iter()
        .flat_map(|m| m.schedule.boundaries())
        .collect();
    bounds.sort_by(f64::total_cmp);
    bounds.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * total);
    if let Some(last) = bounds.last_mut() {
        *last = total;
    }

    let mut firsts = Vec::with_capacity(padded.len());
    let mut site = 0;
    for m in &padded {
        firsts.push(site);
        site += m.layout().n_subsystems();
    }

    let mut segments = Vec::new();
    for w in bounds.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let mut h = linalg::zeros(layout.full_dim());
        for (m, &first) in padded.iter().zip(&firsts) {
            let b = m.schedule.boundaries();
            let k = b.partition_point(|&s| s <= mid).saturating_sub(1);
            let k = k.min(m.schedule.segments().len() - 1);
            let gen = m.schedule.segments()[k].generator.data();
            h += embed_block(gen, first, m.layout().n_subsystems(), &layout)?.into_data();
        }
        segments.push(Segment {
            generator: OperatorMatrix::new(layout.clone(), h)?,
            duration: w[1] - w[0],
        });
    }

    let mut gate = padded[0].ideal_gate().data().clone();
    for m in &padded[1..] {
        gate = linalg::kron(&gate, m.ideal_gate().data());
    }
    let target = OperatorMatrix::new(layout.clone(), gate)?;
    let reference = padded[0].schedule.reference_time();
    let same_reference = padded
        .iter()
        .all(|m| (m.schedule.reference_time() - reference).abs() <= 1e-12 * reference);
    let reference = if same_reference { reference } else { total };
    let schedule = HamiltonianSchedule::new(layout.clone(), segments, target, combined_convention(&padded))?
        .with_reference_time(reference)?;

    let mut channels = Vec::new();
    let mut parts = Vec::new();
    for (p, (m, &first)) in padded.iter().zip(&firsts).enumerate() {
        for ch in &m.channels {
            let jump = embed_block(ch.jump.data(), first, m.layout().n_subsystems(), &layout)?;
            channels.push(NoiseChannel::new(
                relabel(&ch.label, ch.site, first, p),
                ch.kind,
                ch.site.map(|s| s + first),
                jump,
                ch.rate,
                ch.rate_convention,
            )?);
        }
        let part_schedule = m.schedule.clone().with_reference_time(reference)?;
        parts.push(ParallelPart {
            first_site: first,
            model: GateModel {
                schedule: part_schedule,
                ..m.clone()
            },
        });
    }
    let name = format!(
        "parallel({})",
        padded.iter().map(|m| m.name.as_str()).collect::<Vec<_>>().join(",")
    );
    Ok(GateModel {
        name,
        schedule,
        channels,
        parameters: BTreeMap::from([("tau".to_string(), total)]),
        parts,
    })
}

/// Budget of a parallel model evaluated part by part on each constituent's
/// own space, with the register-size reduction applied. `channels` must be in
/// the model's channel order (as from [`GateModel::channels_with_rates`]).
pub fn parallel_budget_reduced(
    model: &GateModel,
    channels: &[NoiseChannel],
    options: &BudgetOptions,
) -> Result<FidelityBudget> {
    if model.parts.is_empty() {
        return assemble_budget(&model.schedule, channels, options);
    }
    if channels.len() != model.channels.len() {
        return Err(Error::Validation(format!(
            "model {} has {} channels, {} given",
            model.name,
            model.channels.len(),
            channels.len()
        )));
    }
    let n = model.layout().n_subsystems();
    let mut entries = Vec::with_capacity(channels.len());
    let mut offset = 0;
    for part in &model.parts {
        let m = part.model.layout().n_subsystems();
        let k = part.model.channels.len();
        let local: Vec<NoiseChannel> = part
            .model
            .channels
            .iter()
            .zip(&channels[offset..offset + k])
            .map(|(tmpl, ch)| tmpl.with_rate(ch.rate))
            .collect::<Result<_>>()?;
        let opts = BudgetOptions {
            parallel: Some(ParallelContext { m, n }),
            ..*options
        };
        let budget = assemble_budget(&part.model.schedule, &local, &opts)?;
        for (mut e, ch) in budget.entries.into_iter().zip(&channels[offset..offset + k]) {
            e.label = ch.label.clone();
            e.site = ch.site;
            entries.push(e);
        }
        offset += k;
    }
    Ok(FidelityBudget::from_entries(
        entries,
        model.schedule.reference_time(),
        model.schedule.tau_total(),
        options.formula,
    ))
}
