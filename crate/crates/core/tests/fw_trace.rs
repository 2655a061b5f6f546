use xpulse_core::fixtures::{fw_equivalence_trace, fw_rhs, fw_rhs_unmerged};
use xpulse_core::gate_library::{fw_residual, fw_sequence, merge_adjacent, FwVariant};
use xpulse_core::rewrite_engine::{replay, unitary_gap, EXACT_TOL};
use xpulse_core::spin_system::{apply_pulses, phase_distance};

#[test]
fn trace_runs_from_lhs_to_rhs() {
    let trace = fw_equivalence_trace().unwrap();
    assert!(!trace.steps.is_empty());
    assert!(trace.check().unwrap() < EXACT_TOL);
    assert_eq!(trace.start.pulses(), fw_sequence(FwVariant::Lhs).pulses());
    let end = trace.end.pulses();
    let rhs = fw_rhs();
    assert_eq!(end.len(), rhs.len());
    assert!(end.iter().zip(&rhs).all(|(a, b)| a.approx_eq(b)));
    assert_eq!(trace.residual.len(), 1);
    assert!(trace.residual[0].approx_eq(&fw_residual()[0]));
}

#[test]
fn replay_is_deterministic() {
    let a = fw_equivalence_trace().unwrap();
    let b = fw_equivalence_trace().unwrap();
    assert_eq!(a.steps, b.steps);
    let out = replay(&a.start, &a.steps).unwrap();
    assert_eq!(out.pulses(), a.end_with_residual().as_slice());
}

#[test]
fn fixtures_are_consistent() {
    let merged = merge_adjacent(&fw_rhs_unmerged());
    assert_eq!(merged.len(), fw_rhs().len());
    assert!(merged.iter().zip(&fw_rhs()).all(|(a, b)| a.approx_eq(b)));
    assert!(unitary_gap(6, &fw_rhs_unmerged(), &fw_rhs()).unwrap() < EXACT_TOL);
    let lhs = apply_pulses(6, fw_sequence(FwVariant::Lhs).pulses()).unwrap();
    let rhs = apply_pulses(6, &fw_rhs()).unwrap();
    // without the trailing SWAP the two forms differ
    assert!(phase_distance(&lhs, &rhs).unwrap() > 0.1);
}
