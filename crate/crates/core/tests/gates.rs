use std::f64::consts::PI;

use proptest::prelude::*;
use xpulse_core::coupling_basis::{coupled_state, CouplingTree as T};
use xpulse_core::encoded_analysis::{star_block, N0};
use xpulse_core::gate_library::*;
use xpulse_core::pulse_sequence::{pulse_count, CountMode, Layout, PulseSequence};
use xpulse_core::rewrite_engine::normalize;
use xpulse_core::spin_system::{apply_pulses, best_phase, invert_pulses, max_abs_diff, phase_distance, ExchangePulse};
use xpulse_core::su2;
use xpulse_core::CMatrix;

fn lower(m: &CMatrix) -> CMatrix {
    m.view((2, 2), (2, 2)).into_owned()
}

fn up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    let ph = best_phase(a, b);
    max_abs_diff(a, &b.map(|z| z * ph))
}

#[test]
fn duration_examples() {
    let d = solve_durations(2.0 * PI / 3.0).unwrap();
    assert!((d.t - T1_PRINTED).abs() < 1e-5);
    assert!((d.t_bar - (5.0 / 3.0 - d.t)).abs() < 1e-12);
    let d = solve_durations(PI).unwrap();
    assert!((d.t - 2.0 / PI * 2f64.sqrt().atan()).abs() < 1e-12);
    let d = solve_durations((-7.0f64 / 8.0).acos()).unwrap();
    assert!((d.t - 0.5241762157).abs() < 1e-9);
    assert!((crot_t_max() - 1.9106332362).abs() < 1e-9);
}

#[test]
fn u3_then_inverse_is_identity() {
    for mirrored in [false, true] {
        let mut pulses = u3_pulses(1.1, mirrored, [0, 1, 2]).unwrap();
        pulses.extend(invert_pulses(&pulses.clone()));
        let u = apply_pulses(3, &pulses).unwrap();
        assert!(max_abs_diff(u.matrix(), &CMatrix::identity(8, 8)) < 1e-12);
    }
}

#[test]
fn t_at_zero_is_identity_on_the_star_block() {
    let u = apply_pulses(4, &t_pulses(0.0, 0).unwrap()).unwrap();
    let c = star_block(&u, 4, 0).unwrap();
    assert!(up_to_phase(&c.matrix, &CMatrix::identity(4, 4)) < 1e-12);
    assert!(c.leakage < 1e-12);
}

#[test]
fn r_is_t0_at_one_with_n0_lower_block() {
    let r = apply_pulses(6, &r_pulses()).unwrap();
    let t0 = apply_pulses(6, &t0_pulses(1.0, 2)).unwrap();
    assert!(phase_distance(&r, &t0).unwrap() < 1e-14);
    let u = apply_pulses(4, &t0_pulses(1.0, 0)).unwrap();
    let c = star_block(&u, 4, 0).unwrap();
    assert!(up_to_phase(&lower(&c.matrix), &su2::dot_sigma(N0)) < 1e-12);
}

#[test]
fn t0_is_a_rotation_about_n0() {
    for t in [0.2, 0.7, 1.3, 1.9] {
        let u = apply_pulses(4, &t0_pulses(t, 0)).unwrap();
        let c = star_block(&u, 4, 0).unwrap();
        assert!(c.leakage < 1e-12);
        let target = su2::exp_i_sigma(-PI * t / 2.0, N0);
        assert!(up_to_phase(&lower(&c.matrix), &target) < 1e-12, "t={t}");
    }
}

#[test]
fn v0_kills_the_forbidden_overlap() {
    let bra = T::node(T::triangle(0, 1), T::triangle(2, 3), 2);
    let ket = T::node(T::leaf(0), T::node(T::triangle(1, 2), T::leaf(3), 3), 2);
    let bra = coupled_state(&bra, 2, 4).unwrap();
    let ket = coupled_state(&ket, 2, 4).unwrap();
    let v0 = apply_pulses(4, &v0_pulses(0)).unwrap();
    let moved = v0.apply(&ket).unwrap();
    assert!(bra.inner(&moved).norm() < 1e-12);
    // V0 is not trivially orthogonal: the bare states overlap
    assert!(bra.inner(&ket).norm() > 0.1);
}

#[test]
fn scalar_skeleton_reduces_to_one_t_pulse() {
    // S ↦ SWAP on (2, ★), T ↦ t-pulse on (2, ★), with ★ a single spin 3
    let p = |i, j, t| ExchangePulse::new(i, j, t).unwrap();
    for t in [0.0, 0.3, 0.7, 1.0, 1.6] {
        let skeleton = [p(2, 3, 1.0), p(1, 2, 1.0), p(2, 3, t), p(1, 2, 1.0), p(2, 3, 1.0)];
        let u = apply_pulses(4, &skeleton).unwrap();
        let single = apply_pulses(4, &[p(1, 2, t)]).unwrap();
        assert!(max_abs_diff(u.matrix(), single.matrix()) < 1e-12, "t={t}");
        let seq = PulseSequence::new(4, Layout::Linear, skeleton.to_vec()).unwrap();
        let n = normalize(&seq, &Layout::Complete).unwrap();
        assert!(n.trace.check().is_ok());
        if t == 0.0 || t == 1.0 {
            // r-pulses: everything folds into the residual permutation
            continue;
        }
        assert!(n.residual.iter().enumerate().all(|(k, &v)| k == v), "t={t}: {:?}", n.residual);
        let core: Vec<_> = n.core.pulses().iter().filter(|q| !q.is_identity()).collect();
        assert!(core.iter().all(|q| q.pair() == (1, 2)), "t={t}: {core:?}");
    }
}

#[test]
fn pulse_counts() {
    assert_eq!(controlled_rotation_package(0.7).unwrap().core().len(), 28);
    assert_eq!(cphase_package(1.2).unwrap().core().len(), 25);
    assert_eq!(fw_sequence(FwVariant::Rhs).len(), 18);
    assert_eq!(t_pulses(0.7, 0).unwrap().len(), 11);
    let lhs = fw_sequence(FwVariant::Lhs);
    assert_eq!(pulse_count(&lhs, CountMode::All), lhs.len());
}

#[test]
fn fw_forms_agree_up_to_a_trailing_swap() {
    let lhs = apply_pulses(6, fw_sequence(FwVariant::Lhs).pulses()).unwrap();
    let mut rhs = fw_sequence(FwVariant::Rhs).pulses().to_vec();
    rhs.extend(fw_residual());
    let rhs = apply_pulses(6, &rhs).unwrap();
    assert!(phase_distance(&lhs, &rhs).unwrap() < 1e-10);
    let m = su2::dot_sigma(N0);
    assert!(max_abs_diff(&(&m * &m), &CMatrix::identity(2, 2)) < 1e-15);
}

#[test]
fn gate_kind_names_round_trip() {
    for k in GateKind::ALL {
        assert_eq!(GateKind::from_name(k.name()), Some(k));
    }
    assert!(verify_contract(&NamedGateSpec { kind: GateKind::U5, parameter: 1.0, offset: 1 }).is_err());
}

#[test]
fn fixed_gates_meet_their_contracts() {
    for kind in [GateKind::S, GateKind::FwLhs, GateKind::FwRhs] {
        let r = verify_contract(&NamedGateSpec::new(kind, 0.0)).unwrap();
        assert!(r.passed, "{kind:?}: {:?}", r.failing_block);
    }
}

#[test]
fn a_wrong_parameter_fails_its_contract() {
    let spec = NamedGateSpec::new(GateKind::U4, 1.0);
    let wrong = u4_pulses(1.3, 0).unwrap();
    let r = verify_pulses(&spec, &wrong).unwrap();
    assert!(!r.passed);
    assert!(r.failing_block.is_some());
    assert!(r.max_deviation > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn durations_satisfy_both_conditions(phi in 0.01..(2.0 * PI - 0.01)) {
        let d = solve_durations(phi).unwrap();
        prop_assert!((0.0..=1.0).contains(&d.t));
        prop_assert!((d.phi() - phi).abs() < 1e-12);
        prop_assert!(d.tan_residual().abs() < 1e-7 * (1.0 + (PI * d.t / 2.0).tan().abs()));
    }

    #[test]
    fn small_gate_contracts(phi in 0.0..(2.0 * PI), offset in 0usize..3) {
        for kind in [GateKind::U3, GateKind::U3Bar, GateKind::U4] {
            let r = verify_contract(&NamedGateSpec { kind, parameter: phi, offset }).unwrap();
            prop_assert!(r.passed, "{kind:?} φ={phi}: {:?} {}", r.failing_block, r.max_deviation);
        }
    }

    #[test]
    fn t_contract(t in 0.0..1.99f64) {
        let r = verify_contract(&NamedGateSpec::new(GateKind::T, t)).unwrap();
        prop_assert!(r.passed, "t={t}: {:?} {}", r.failing_block, r.max_deviation);
    }

    #[test]
    fn two_qubit_contracts(phi in 0.0..(2.0 * PI), frac in 0.0..1.0f64) {
        for (kind, x) in [
            (GateKind::U5, phi),
            (GateKind::U5Bar, phi),
            (GateKind::Cphase, phi),
            (GateKind::Crot, frac * crot_t_max()),
        ] {
            let r = verify_contract(&NamedGateSpec::new(kind, x)).unwrap();
            prop_assert!(r.passed, "{kind:?} x={x}: {:?} {}", r.failing_block, r.max_deviation);
        }
    }
}
