// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Randomized invariants.

use std::f64::consts::PI;

use cqed_core::dynamics::{evolve_const, evolve_timedep, FnHamiltonian};
use cqed_core::feasibility::{assess, FeasibilityInput};
use cqed_core::hamiltonians::{h_eff_vacuum, h_int_rwa, CavityMode, CouplingSet, Transition};
use cqed_core::hilbert::{fidelity_up_to_global_phase, kron, matexp_unitary, partial_trace, purity, reduced_density};
use cqed_core::protocols::{
    dispersive_map, execute, rotation_map, schedule_by_name, Backend, DispersiveBinding, GateSchedule, RabiSet, SCHEDULE_NAMES,
};
use cqed_core::squid::{solve, FluxGrid, LevelStructure, SquidParams};
use cqed_core::verify::{concurrence, gate_fidelity};
use cqed_core::{HbarConvention, Operator, StateVector, C64};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn state(dims: Vec<usize>) -> impl Strategy<Value = StateVector> {
    let n: usize = dims.iter().product();
    prop::collection::vec(complex(), n)
        .prop_filter("nonzero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(move |v| StateVector::normalized(DVector::from_vec(v), dims.clone()).unwrap())
}

fn hermitian(dims: Vec<usize>) -> impl Strategy<Value = Operator> {
    let n: usize = dims.iter().product();
    prop::collection::vec(complex(), n * n).prop_map(move |v| {
        let m = DMatrix::from_vec(n, n, v);
        Operator::hermitian((&m + m.adjoint()) * C64::new(0.5, 0.0), dims.clone()).unwrap()
    })
}

fn unitary(d: usize) -> impl Strategy<Value = Operator> {
    (hermitian(vec![d]), 0.1f64..5.0).prop_map(|(h, t)| matexp_unitary(&h, t, HbarConvention::AngularFrequency).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagators_are_unitary(h in hermitian(vec![3, 2]), t in -10.0f64..10.0) {
        let u = matexp_unitary(&h, t, HbarConvention::AngularFrequency).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn propagators_compose(h in hermitian(vec![3]), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let c = HbarConvention::AngularFrequency;
        let lhs = matexp_unitary(&h, t1, c).unwrap().mul(&matexp_unitary(&h, t2, c).unwrap()).unwrap();
        let rhs = matexp_unitary(&h, t1 + t2, c).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn evolution_conserves_norm(h in hermitian(vec![2, 3]), psi in state(vec![2, 3]), t in 0.0f64..20.0) {
        let out = evolve_const(&h, t, &psi, HbarConvention::AngularFrequency).unwrap();
        prop_assert!((out.final_state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn timedep_evolution_conserves_norm(h in hermitian(vec![3]), psi in state(vec![3]), w in 0.5f64..5.0) {
        let drive = FnHamiltonian::new(vec![3], w, move |t| h.scaled((w * t).sin()));
        let r = evolve_timedep(&drive, 0.0, 3.0, 0.05, &psi).unwrap();
        prop_assert!(r.max_norm_drift < 1e-12);
    }

    #[test]
    fn kron_mixed_product(a in hermitian(vec![2]), b in hermitian(vec![3]), c in hermitian(vec![2]), d in hermitian(vec![3])) {
        let lhs = kron(&a, &b).unwrap().mul(&kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&a.mul(&c).unwrap(), &b.mul(&d).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        prop_assert_eq!(lhs.dims(), &[2, 3]);
    }

    #[test]
    fn kron_trace_factorizes(a in hermitian(vec![2]), b in hermitian(vec![3])) {
        let t = kron(&a, &b).unwrap().trace();
        prop_assert!((t - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn fidelity_ignores_global_phase(psi in state(vec![3, 3]), phi in state(vec![3, 3]), x in 0.0f64..(2.0 * PI), y in 0.0f64..(2.0 * PI)) {
        let f = fidelity_up_to_global_phase(&psi, &phi).unwrap();
        let g = fidelity_up_to_global_phase(&psi.scaled(C64::from_polar(1.0, x)), &phi.scaled(C64::from_polar(1.0, y))).unwrap();
        prop_assert!((f - g).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn gate_fidelity_ignores_global_phase(u in unitary(4), x in 0.0f64..(2.0 * PI)) {
        let u = u.with_dims(vec![2, 2]).unwrap();
        let f = gate_fidelity(&u.scaled_complex(C64::from_polar(1.0, x)), &u).unwrap();
        prop_assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(psi in state(vec![2, 2]), ua in unitary(2), ub in unitary(2)) {
        let moved = psi.apply(&kron(&ua, &ub).unwrap()).unwrap();
        prop_assert!((concurrence(&moved).unwrap() - concurrence(&psi).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn concurrence_matches_reduced_purity(psi in state(vec![2, 2])) {
        // For pure two-qubit states C² = 2(1 − Tr ρ_A²).
        let c = concurrence(&psi).unwrap();
        let p = purity(&reduced_density(&psi, &[0]).unwrap());
        prop_assert!((c * c - 2.0 * (1.0 - p)).abs() < 1e-12);
    }

    #[test]
    fn reduced_density_matches_partial_trace(psi in state(vec![3, 2])) {
        let a = reduced_density(&psi, &[1]).unwrap();
        let b = partial_trace(&psi.density(), &[1]).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
        prop_assert!((a.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotations_compose_additively(a in -4.0f64..4.0, b in -4.0f64..4.0, k in 0usize..3) {
        let t = Transition::ALL[k];
        let lhs = rotation_map(t, a).mul(&rotation_map(t, b)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rotation_map(t, a + b)).unwrap() < 1e-12);
    }

    #[test]
    fn dispersive_map_is_the_effective_propagator(gamma in 0.1f64..10.0, t in 0.0f64..5.0) {
        let exact = matexp_unitary(&h_eff_vacuum(gamma), t, HbarConvention::AngularFrequency).unwrap();
        prop_assert!(dispersive_map(gamma, t).max_abs_diff(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn backends_agree_for_any_rates(k in 0usize..4, g in 1e5f64..1e8, w in 1e6f64..1e9, psi in state(vec![3, 3])) {
        let s = schedule_by_name(SCHEDULE_NAMES[k]).unwrap();
        let b = Backend::Dispersive(DispersiveBinding { gamma: Some(g), rabi: RabiSet::uniform(w) });
        let x = execute(&s, &psi, &Backend::Analytic).unwrap().final_state;
        let y = execute(&s, &psi, &b).unwrap().final_state;
        prop_assert!(1.0 - fidelity_up_to_global_phase(&x, &y).unwrap() < 1e-9);
    }

    #[test]
    fn schedule_text_roundtrips(k in 0usize..4) {
        let s = schedule_by_name(SCHEDULE_NAMES[k]).unwrap();
        let back = GateSchedule::from_toml_str(&s.to_toml_string()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn rwa_hamiltonian_is_hermitian(g in 1e6f64..1e9, wc in 1e10f64..1e12, t in 0.0f64..1e-8) {
        let ls = LevelStructure::from_frequencies(&[0.0, 0.05 * wc, 0.99 * wc]).unwrap();
        let mode = CavityMode::new(wc, 3, 0.0).unwrap();
        let h = h_int_rwa(&CouplingSet::from_g02(g), &ls, &mode).unwrap().hamiltonian.evaluate(t).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12 * h.scale());
    }

    #[test]
    fn feasibility_is_linear_in_gate_time(q in 1e3f64..1e9, nu in 1e9f64..1e11, t_op in 1e-10f64..1e-6, t_r in 1e-7f64..1e-3, k in 1.0f64..10.0) {
        let f = FeasibilityInput { q_factor: q, nu, t_op, t_r };
        let a = assess(&f).unwrap();
        let b = assess(&FeasibilityInput { t_op: k * t_op, ..f }).unwrap();
        prop_assert!((b.q_min / a.q_min - k).abs() < 1e-12 * k);
        prop_assert!((a.t_c * 2.0 * PI * nu / q - 1.0).abs() < 1e-12);
        prop_assert_eq!(a.pass, q >= 10.0 * a.q_min);
        prop_assert_eq!(a, assess(&f).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn spectrum_is_symmetric_about_half_flux(beta in 0.2f64..0.9, c_ff in 20.0f64..80.0) {
        use cqed_core::units::FLUX_QUANTUM;
        let l = 100e-12;
        let ic = beta * FLUX_QUANTUM / (2.0 * PI * l);
        let mk = |x: f64| SquidParams::new(c_ff * 1e-15, l, ic, x * FLUX_QUANTUM).unwrap();
        let (p, q) = (mk(0.47), mk(0.53));
        let gp = FluxGrid::around_bias(&p, 0.5, 2001).unwrap();
        let gq = FluxGrid::around_bias(&q, 0.5, 2001).unwrap();
        let (a, b) = (solve(&p, &gp, 3).unwrap(), solve(&q, &gq, 3).unwrap());
        for (x, y) in [(a.omega_10(), b.omega_10()), (a.omega_20(), b.omega_20())] {
            prop_assert!(((x - y) / y).abs() < 1e-6);
        }
    }
}
