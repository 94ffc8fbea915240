// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use gatefid::analytic::{
    delta_f, delta_f_haar_exact, delta_f_parallel, integrate, ChannelKind, NoiseChannel,
    QuadratureSpec,
};
use gatefid::hilbert::{embed, pauli_basis, OperatorMatrix, SystemLayout};
use gatefid::linalg::{self, c, HermitianEigen, Mat};
use gatefid::liouville::{
    haar_average_fidelity, lindblad_evolve, ChannelTomogram, DensityMatrix, SolverOptions,
};
use gatefid::matrix_file::{format_matrix, parse_matrix};
use gatefid::propagator::{
    embed_cmp_gate, heisenberg_jump, propagator_at, taylor_exp_reference, HamiltonianSchedule,
    PhaseConvention, Segment,
};
use gatefid::rational::rational_hint;
use gatefid::units::{format_quantity, parse_quantity, Dimension};
use proptest::prelude::*;

fn complex_matrix(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| Mat::from_fn(n, n, |r, col| c(v[r * n + col].0, v[r * n + col].1)))
}

fn hermitian(n: usize) -> impl Strategy<Value = Mat> {
    complex_matrix(n).prop_map(|m| (&m + m.adjoint()).scale(0.5))
}

fn layout_strategy() -> impl Strategy<Value = Arc<SystemLayout>> {
    prop::collection::vec(2usize..=3, 1..=3)
        .prop_filter("small spaces", |d| d.iter().product::<usize>() <= 18)
        .prop_map(|dims| Arc::new(SystemLayout::compose(&dims, None).unwrap()))
}

fn layout_and_matrix() -> impl Strategy<Value = (Arc<SystemLayout>, Mat)> {
    layout_strategy().prop_flat_map(|l| {
        let n = l.full_dim();
        (Just(l), complex_matrix(n))
    })
}

fn random_unitary(n: usize) -> impl Strategy<Value = Mat> {
    hermitian(n).prop_map(|h| HermitianEigen::new(&h.scale(3.0)).evolve(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn levels_index_round_trip(l in layout_strategy(), k in 0usize..18) {
        let idx = k % l.full_dim();
        prop_assert_eq!(l.index_of(&l.levels_of(idx)).unwrap(), idx);
    }

    #[test]
    fn embedding_preserves_unitarity(u in random_unitary(3), site in 0usize..2) {
        let layout = Arc::new(SystemLayout::compose(&[3, 3], None).unwrap());
        let e = embed(&u, site, &layout).unwrap();
        prop_assert!(linalg::unitarity_defect(e.data()) < 1e-12);
    }

    #[test]
    fn four_f_identity_sampled(j in 0usize..64, k in 0usize..64) {
        let basis = pauli_basis(3).unwrap();
        let mut acc = linalg::ZERO;
        for fi in &basis {
            acc += linalg::trace(&(&basis[j].matrix * &fi.matrix * &basis[k].matrix * &fi.matrix));
        }
        let expected = if j == 0 && k == 0 { 512.0 } else { 0.0 };
        prop_assert!((acc - c(expected, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn propagator_is_unitary_and_matches_taylor(h in hermitian(4), t in 0.0f64..3.0) {
        let eig = HermitianEigen::new(&h).evolve(t);
        prop_assert!(linalg::unitarity_defect(&eig) < 1e-12);
        let reference = taylor_exp_reference(&h, t, 30, 6);
        prop_assert!(linalg::max_abs_diff(&eig, &reference) < 1e-10);
    }

    #[test]
    fn piecewise_propagator_composes(h1 in hermitian(4), h2 in hermitian(4), s in 0.1f64..0.9) {
        let layout = Arc::new(SystemLayout::qubits(2).unwrap());
        let seg = |h: &Mat, dur| Segment {
            generator: OperatorMatrix::new(layout.clone(), h.clone()).unwrap(),
            duration: dur,
        };
        let schedule = HamiltonianSchedule::new(
            layout.clone(),
            vec![seg(&h1, 1.0), seg(&h2, 0.5)],
            OperatorMatrix::identity(layout.clone()),
            PhaseConvention::None,
        )
        .unwrap();
        let t = 1.0 + 0.5 * s;
        let u = propagator_at(&schedule, t).unwrap();
        let expected = HermitianEigen::new(&h2).evolve(t - 1.0) * HermitianEigen::new(&h1).evolve(1.0);
        prop_assert!(linalg::max_abs_diff(u.data(), &expected) < 1e-12);
    }

    #[test]
    fn delta_f_is_non_positive((l, m) in layout_and_matrix()) {
        let op = OperatorMatrix::new(l, m).unwrap();
        let projected = delta_f(&op).unwrap();
        let exact = delta_f_haar_exact(&op).unwrap();
        prop_assert!(projected <= 1e-15);
        prop_assert!(exact <= projected + 1e-14);
    }

    #[test]
    fn delta_f_scales_quadratically((l, m) in layout_and_matrix(), a in 0.1f64..3.0) {
        let op = OperatorMatrix::new(l.clone(), m.clone()).unwrap();
        let scaled = OperatorMatrix::new(l, m.scale(a)).unwrap();
        let (x, y) = (delta_f(&op).unwrap(), delta_f(&scaled).unwrap());
        prop_assert!((y - a * a * x).abs() <= 1e-12 * (1.0 + y.abs()));
    }

    #[test]
    fn formulas_agree_for_subspace_preserving_operators(m in complex_matrix(4)) {
        let layout = Arc::new(SystemLayout::compose(&[3, 2], None).unwrap());
        let op = embed_cmp_gate(&layout, &m).unwrap();
        // zero the identity padding outside the subspace
        let mut data = op.into_data();
        for &k in &[4usize, 5] {
            data[(k, k)] = linalg::ZERO;
        }
        let op = OperatorMatrix::new(layout, data).unwrap();
        let (a, b) = (delta_f(&op).unwrap(), delta_f_haar_exact(&op).unwrap());
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn parallel_density_reduces_to_plain_when_m_equals_n(m in complex_matrix(4)) {
        let layout = Arc::new(SystemLayout::qubits(2).unwrap());
        let op = OperatorMatrix::new(layout, m).unwrap();
        let a = delta_f(&op).unwrap();
        let b = delta_f_parallel(&op, 2, 2).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_jump_preserves_norm(h in hermitian(4), m in complex_matrix(4), t in 0.0f64..2.0) {
        let layout = Arc::new(SystemLayout::qubits(2).unwrap());
        let schedule = HamiltonianSchedule::new(
            layout.clone(),
            vec![Segment { generator: OperatorMatrix::new(layout.clone(), h).unwrap(), duration: 2.0 }],
            OperatorMatrix::identity(layout.clone()),
            PhaseConvention::None,
        )
        .unwrap();
        let l = OperatorMatrix::new(layout, m.clone()).unwrap();
        let lt = heisenberg_jump(&schedule, &l, t).unwrap();
        prop_assert!((lt.data().norm() - m.norm()).abs() < 1e-10);
    }

    #[test]
    fn quadrature_integrates_polynomials(a0 in -2.0f64..2.0, a1 in -2.0f64..2.0, a4 in -2.0f64..2.0, b in 0.5f64..3.0) {
        let f = |t: f64| Ok(a0 + a1 * t + a4 * t.powi(4));
        let exact = a0 * b + a1 * b * b / 2.0 + a4 * b.powi(5) / 5.0;
        for spec in [QuadratureSpec::default(), QuadratureSpec::gauss_legendre(16)] {
            let r = integrate(&f, 0.0, b, 1e-11, &spec).unwrap();
            prop_assert!((r.value - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn rational_hints_recover_fractions(p in -500i64..500, q in 1u64..=1000) {
        let x = p as f64 / q as f64;
        let r = rational_hint(x).unwrap();
        prop_assert!(r.denom <= q);
        prop_assert!((r.value() - x).abs() <= 1e-9);
    }

    #[test]
    fn quantities_round_trip(v in 1e-12f64..1e12) {
        for d in [Dimension::Rate, Dimension::AngularFrequency, Dimension::Time] {
            prop_assert_eq!(parse_quantity(&format_quantity(v, d), d).unwrap(), v);
        }
    }

    #[test]
    fn matrix_files_round_trip(m in complex_matrix(3)) {
        prop_assert_eq!(parse_matrix(&format_matrix(&m), "p").unwrap(), m);
    }

    #[test]
    fn unitary_channel_has_unit_fidelity(u in random_unitary(4)) {
        let layout = Arc::new(SystemLayout::qubits(2).unwrap());
        let tomo = ChannelTomogram::from_fn(layout.clone(), |i, j| {
            &u * linalg::dyad(4, i, j) * u.adjoint()
        })
        .unwrap();
        let f = haar_average_fidelity(&tomo, &OperatorMatrix::new(layout, u.clone()).unwrap()).unwrap();
        prop_assert!((f - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lindblad_preserves_trace_hermiticity_positivity(
        h in hermitian(3),
        l in complex_matrix(3),
        rate in 0.0f64..0.5,
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
    ) {
        prop_assume!(amps.iter().any(|a| a.0.abs() + a.1.abs() > 1e-3));
        let layout = Arc::new(SystemLayout::compose(&[3], None).unwrap());
        let schedule = HamiltonianSchedule::new(
            layout.clone(),
            vec![Segment { generator: OperatorMatrix::new(layout.clone(), h).unwrap(), duration: 1.0 }],
            OperatorMatrix::identity(layout.clone()),
            PhaseConvention::None,
        )
        .unwrap();
        let ch = NoiseChannel::new("l", ChannelKind::Custom, Some(0), OperatorMatrix::new(layout.clone(), l).unwrap(), rate, 1.0).unwrap();
        let amps: Vec<_> = amps.iter().map(|&(re, im)| c(re, im)).collect();
        let rho0 = DensityMatrix::from_cmp_state(layout, &amps).unwrap();
        let out = lindblad_evolve(&rho0, &schedule, &[ch], &SolverOptions::default()).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-9);
        prop_assert!(linalg::hermiticity_defect(out.data()) < 1e-9);
        prop_assert!(out.min_eigenvalue() > -1e-8);
    }
}
