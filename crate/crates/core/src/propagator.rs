// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

//! Unitary propagators of piecewise-constant Hamiltonian schedules and
//! Heisenberg-picture jump operators L(t) = U†(t) L U(t).
//!
//! Generators are in angular-frequency units (rad/s) with ħ = 1, durations in
//! seconds. Only piecewise-constant schedules are supported; time-dependent
//! couplings must be discretised into segments by the caller.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{OperatorMatrix, SystemLayout};
use crate::linalg::{self, HermitianEigen, Mat};

const HERMITICITY_TOL: f64 = 1e-12;
const UNITARITY_TOL: f64 = 1e-10;

/// Which phases are quotiented out when comparing U(τ) with the target gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// Exact comparison.
    #[default]
    None,
    /// One overall phase.
    Global,
    /// An overall phase plus one relative phase diag(1, e^{iθ}) per qubit.
    LocalZ,
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub generator: OperatorMatrix,
    pub duration: f64,
}

#[derive(Debug, Clone)]
pub struct HamiltonianSchedule {
    layout: Arc<SystemLayout>,
    segments: Vec<Segment>,
    tau_total: f64,
    reference_time: f64,
    target_gate: OperatorMatrix,
    phase_convention: PhaseConvention,
}

impl HamiltonianSchedule {
    /// Builds and validates a schedule. The reference time used to normalise
    /// budget coefficients defaults to the total duration.
    pub fn new(
        layout: Arc<SystemLayout>,
        segments: Vec<Segment>,
        target_gate: OperatorMatrix,
        phase_convention: PhaseConvention,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Validation("schedule has no segments".into()));
        }
        for (k, seg) in segments.iter().enumerate() {
            if seg.generator.layout() != &layout {
                return Err(Error::Validation(format!(
                    "segment {k}: generator layout differs from schedule layout"
                )));
            }
            if !(seg.duration.is_finite() && seg.duration > 0.0) {
                return Err(Error::Validation(format!(
                    "segment {k}: duration must be positive, got {}",
                    seg.duration
                )));
            }
            let scale = linalg::max_abs(seg.generator.data()).max(1.0);
            let defect = seg.generator.hermiticity_defect();
            if defect > HERMITICITY_TOL * scale {
                return Err(Error::Validation(format!(
                    "segment {k}: generator is not Hermitian (defect {defect:e})"
                )));
            }
        }
        if target_gate.layout() != &layout {
            return Err(Error::Validation("target gate layout differs from schedule layout".into()));
        }
        let udef = linalg::unitarity_defect(target_gate.data());
        if udef > UNITARITY_TOL {
            return Err(Error::Validation(format!(
                "target gate is not unitary (defect {udef:e})"
            )));
        }
        let tau_total = segments.iter().map(|s| s.duration).sum();
        Ok(HamiltonianSchedule {
            layout,
            segments,
            tau_total,
            reference_time: tau_total,
            target_gate,
            phase_convention,
        })
    }

    /// Overrides the time τ in which budget contributions c Γ τ are expressed.
    pub fn with_reference_time(mut self, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Validation(format!(
                "reference time must be positive, got {tau}"
            )));
        }
        self.reference_time = tau;
        Ok(self)
    }

    pub fn layout(&self) -> &Arc<SystemLayout> {
        &self.layout
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn tau_total(&self) -> f64 {
        self.tau_total
    }

    pub fn reference_time(&self) -> f64 {
        self.reference_time
    }

    pub fn target_gate(&self) -> &OperatorMatrix {
        &self.target_gate
    }

    pub fn phase_convention(&self) -> PhaseConvention {
        self.phase_convention
    }

    /// Segment start times, with the total duration appended.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut t = 0.0;
        out.push(t);
        for s in &self.segments {
            t += s.duration;
            out.push(t);
        }
        out
    }

    pub fn cache(&self) -> PropagatorCache<'_> {
        PropagatorCache::new(self)
    }
}

/// Segment eigendecompositions plus the propagator at each segment start.
#[derive(Debug, Clone)]
pub struct PropagatorCache<'a> {
    schedule: &'a HamiltonianSchedule,
    eigen: Vec<HermitianEigen>,
    starts: Vec<f64>,
    // V_k† U(t_k), full and restricted to the computational columns
    vdag_start: Vec<Mat>,
    vdag_start_cmp: Vec<Mat>,
}

impl<'a> PropagatorCache<'a> {
    pub fn new(schedule: &'a HamiltonianSchedule) -> Self {
        let n = schedule.layout.full_dim();
        let iso = schedule.layout.cmp_isometry();
        let mut eigen = Vec::with_capacity(schedule.segments.len());
        let mut starts = Vec::with_capacity(schedule.segments.len());
        let mut vdag_start = Vec::with_capacity(schedule.segments.len());
        let mut vdag_start_cmp = Vec::with_capacity(schedule.segments.len());
        let mut u = linalg::identity(n);
        let mut t = 0.0;
        for seg in &schedule.segments {
            let e = HermitianEigen::new(seg.generator.data());
            let vd = e.vectors.adjoint() * &u;
            vdag_start_cmp.push(&vd * &iso);
            vdag_start.push(vd);
            u = e.evolve(seg.duration) * u;
            starts.push(t);
            t += seg.duration;
            eigen.push(e);
        }
        PropagatorCache {
            schedule,
            eigen,
            starts,
            vdag_start,
            vdag_start_cmp,
        }
    }

    pub fn schedule(&self) -> &HamiltonianSchedule {
        self.schedule
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let tau = self.schedule.tau_total;
        let slack = 1e-12 * tau;
        if !t.is_finite() || t < -slack || t > tau + slack {
            return Err(Error::TimeOutOfRange { t, tau });
        }
        let t = t.clamp(0.0, tau);
        let k = self.starts.partition_point(|&s| s <= t).saturating_sub(1);
        let local = (t - self.starts[k]).clamp(0.0, self.schedule.segments[k].duration);
        Ok((k, local))
    }

    /// U(t) as a dense matrix.
    pub fn propagator(&self, t: f64) -> Result<Mat> {
        let (k, dt) = self.locate(t)?;
        Ok(self.eigen[k].evolve_apply(dt, &self.vdag_start[k]))
    }

    /// U(t)·P, the full_dim × d image of the computational basis.
    pub fn propagator_cmp(&self, t: f64) -> Result<Mat> {
        let (k, dt) = self.locate(t)?;
        Ok(self.eigen[k].evolve_apply(dt, &self.vdag_start_cmp[k]))
    }

    /// Largest spectral spread over all segment generators (rad/s).
    pub fn max_spectral_spread(&self) -> f64 {
        self.eigen
            .iter()
            .map(HermitianEigen::spectral_spread)
            .fold(0.0, f64::max)
    }

    /// Exact propagator of segment `k` over a local time step `dt`.
    pub fn segment_step(&self, k: usize, dt: f64) -> Mat {
        self.eigen[k].evolve(dt)
    }
}

pub fn propagator_at(schedule: &HamiltonianSchedule, t: f64) -> Result<OperatorMatrix> {
    let u = schedule.cache().propagator(t)?;
    OperatorMatrix::new(schedule.layout.clone(), u)
}

/// L(t) = U†(t) L U(t).
pub fn heisenberg_jump(
    schedule: &HamiltonianSchedule,
    jump: &OperatorMatrix,
    t: f64,
) -> Result<OperatorMatrix> {
    if jump.layout() != schedule.layout() {
        return Err(Error::Validation("jump operator layout differs from schedule layout".into()));
    }
    let u = schedule.cache().propagator(t)?;
    let lt = u.adjoint() * jump.data() * &u;
    OperatorMatrix::new(schedule.layout.clone(), lt)
}

/// Phases fitted between U(τ) and the target gate on the computational subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPhases {
    pub global: f64,
    /// One per qubit, qubit 1 first. Empty unless the convention is `LocalZ`.
    pub local: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateCheck {
    pub deviation: f64,
    pub phases: FittedPhases,
}

/// ‖P(U(τ) − D U_g)P‖_max, where D carries the phases quotiented by the
/// schedule's phase convention.
pub fn ideal_gate_check(schedule: &HamiltonianSchedule) -> Result<GateCheck> {
    let u = schedule.cache().propagator(schedule.tau_total)?;
    let u = OperatorMatrix::new(schedule.layout.clone(), u)?;
    let uc = u.project_cmp();
    let g = schedule.target_gate.project_cmp();
    let phases = fit_phases(&uc, &g, schedule.phase_convention, schedule.layout.n_subsystems());
    let dg = apply_phases(&g, &phases);
    Ok(GateCheck {
        deviation: linalg::max_abs_diff(&uc, &dg),
        phases,
    })
}

/// The target gate on the full space with the fitted phases applied to its
/// computational block, i.e. the unitary the schedule actually realises.
pub fn effective_target(schedule: &HamiltonianSchedule) -> Result<OperatorMatrix> {
    let check = ideal_gate_check(schedule)?;
    let n_qubits = schedule.layout.n_subsystems();
    let mut data = schedule.target_gate.data().clone();
    let idx = schedule.layout.cmp_indices();
    for (a, &row) in idx.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, phase_of(&check.phases, a, n_qubits));
        for col in 0..data.ncols() {
            data[(row, col)] *= ph;
        }
    }
    OperatorMatrix::new(schedule.layout.clone(), data)
}

fn phase_of(phases: &FittedPhases, basis_index: usize, n_qubits: usize) -> f64 {
    let mut p = phases.global;
    for (q, th) in phases.local.iter().enumerate() {
        if (basis_index >> (n_qubits - 1 - q)) & 1 == 1 {
            p += th;
        }
    }
    p
}

fn apply_phases(g: &Mat, phases: &FittedPhases) -> Mat {
    let d = g.nrows();
    let n_qubits = d.trailing_zeros() as usize;
    let mut out = g.clone();
    for a in 0..d {
        let ph = Complex64::from_polar(1.0, phase_of(phases, a, n_qubits));
        for b in 0..d {
            out[(a, b)] *= ph;
        }
    }
    out
}

fn fit_phases(uc: &Mat, g: &Mat, convention: PhaseConvention, n_qubits: usize) -> FittedPhases {
    match convention {
        PhaseConvention::None => FittedPhases {
            global: 0.0,
            local: Vec::new(),
        },
        PhaseConvention::Global => {
            let overlap = linalg::trace(&(g.adjoint() * uc));
            FittedPhases {
                global: if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 },
                local: Vec::new(),
            }
        }
        PhaseConvention::LocalZ => {
            // U G† is diagonal for a gate equal to G up to local Z phases;
            // its phases on |0…0⟩ and on each single-excitation state fix D.
            let m = uc * g.adjoint();
            let arg = |a: usize| {
                let z = m[(a, a)];
                if z.norm() > 0.0 {
                    z.arg()
                } else {
                    0.0
                }
            };
            let global = arg(0);
            let local = (0..n_qubits)
                .map(|q| wrap(arg(1 << (n_qubits - 1 - q)) - global))
                .collect();
            FittedPhases { global, local }
        }
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut y = x % tau;
    if y <= -std::f64::consts::PI {
        y += tau;
    } else if y > std::f64::consts::PI {
        y -= tau;
    }
    y
}

/// Identity on the full space with `gate` placed on the computational block.
pub fn embed_cmp_gate(layout: &Arc<SystemLayout>, gate: &Mat) -> Result<OperatorMatrix> {
    let d = layout.cmp_dim();
    if gate.nrows() != d || gate.ncols() != d {
        return Err(Error::Validation(format!(
            "computational gate is {}x{}, expected {d}x{d}",
            gate.nrows(),
            gate.ncols()
        )));
    }
    let mut data = linalg::identity(layout.full_dim());
    let idx = layout.cmp_indices();
    for (a, &r) in idx.iter().enumerate() {
        data[(r, r)] = linalg::ZERO;
        for (b, &c) in idx.iter().enumerate() {
            data[(r, c)] = gate[(a, b)];
        }
    }
    OperatorMatrix::new(layout.clone(), data)
}

/// A single-segment schedule with zero Hamiltonian, whose ideal gate is the identity.
pub fn idle_schedule(layout: Arc<SystemLayout>, tau: f64) -> Result<HamiltonianSchedule> {
    let zero = OperatorMatrix::zeros(layout.clone());
    let id = OperatorMatrix::identity(layout.clone());
    HamiltonianSchedule::new(
        layout,
        vec![Segment {
            generator: zero,
            duration: tau,
        }],
        id,
        PhaseConvention::None,
    )
}

#[doc(hidden)]
pub fn taylor_exp_reference(h: &Mat, t: f64, order: usize, squarings: u32) -> Mat {
    let n = h.nrows();
    let a = h.map(|z| z * linalg::c(0.0, -t / f64::from(1u32 << squarings)));
    let mut term = linalg::identity(n);
    let mut sum = linalg::identity(n);
    for k in 1..=order {
        term = (&term * &a).map(|z| z / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn two_level_schedule() -> HamiltonianSchedule {
        let layout = Arc::new(SystemLayout::qubits(1).unwrap());
        let x = OperatorMatrix::new(layout.clone(), crate::hilbert::pauli(1)).unwrap();
        let z = OperatorMatrix::new(layout.clone(), crate::hilbert::pauli(3)).unwrap();
        let target = OperatorMatrix::identity(layout.clone());
        HamiltonianSchedule::new(
            layout,
            vec![
                Segment {
                    generator: x,
                    duration: 0.3,
                },
                Segment {
                    generator: z,
                    duration: 0.5,
                },
            ],
            target,
            PhaseConvention::None,
        )
        .unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let s = two_level_schedule();
        let u = propagator_at(&s, 0.0).unwrap();
        assert!(linalg::max_abs_diff(u.data(), &linalg::identity(2)) < 1e-15);
    }

    #[test]
    fn segments_compose() {
        let s = two_level_schedule();
        let u = propagator_at(&s, 0.6).unwrap();
        let ux = HermitianEigen::new(&crate::hilbert::pauli(1)).evolve(0.3);
        let uz = HermitianEigen::new(&crate::hilbert::pauli(3)).evolve(0.3);
        assert!(linalg::max_abs_diff(u.data(), &(uz * ux)) < 1e-13);
    }

    #[test]
    fn out_of_range_time_rejected() {
        let s = two_level_schedule();
        assert!(matches!(
            propagator_at(&s, 0.81),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(propagator_at(&s, -0.1).is_err());
    }

    #[test]
    fn non_hermitian_generator_rejected() {
        let layout = Arc::new(SystemLayout::qubits(1).unwrap());
        let bad = OperatorMatrix::new(layout.clone(), linalg::dyad(2, 0, 1)).unwrap();
        let r = HamiltonianSchedule::new(
            layout.clone(),
            vec![Segment {
                generator: bad,
                duration: 1.0,
            }],
            OperatorMatrix::identity(layout),
            PhaseConvention::None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn local_phase_fit_recovers_phases() {
        let layout = Arc::new(SystemLayout::qubits(2).unwrap());
        let d = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            cis(0.4),
            cis(-1.1),
            cis(0.4 - 1.1) * c(-1.0, 0.0),
        ]));
        let h = Mat::from_diagonal(&nalgebra::DVector::from_vec(
            d.diagonal().iter().map(|z| c(-z.arg(), 0.0)).collect(),
        ));
        let cz = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(-1.0, 0.0),
        ]));
        let s = HamiltonianSchedule::new(
            layout.clone(),
            vec![Segment {
                generator: OperatorMatrix::new(layout.clone(), h).unwrap(),
                duration: 1.0,
            }],
            OperatorMatrix::new(layout, cz).unwrap(),
            PhaseConvention::LocalZ,
        )
        .unwrap();
        let check = ideal_gate_check(&s).unwrap();
        assert!(check.deviation < 1e-12, "{}", check.deviation);
        assert!((check.phases.local[0] + 1.1).abs() < 1e-12);
        assert!((check.phases.local[1] - 0.4).abs() < 1e-12);
    }

    fn cis(x: f64) -> Complex64 {
        Complex64::from_polar(1.0, x)
    }

    #[test]
    fn wrap_range() {
        assert!((wrap(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap(-0.5) + 0.5).abs() < 1e-15);
    }
}
