use proptest::prelude::*;
use xpulse_core::coupling_basis::*;
use xpulse_core::encoded_analysis::{extract_gate_unitary, EncodedBasis};
use xpulse_core::spin_system::{apply_pulses, max_abs_diff, total_spin_squared, total_sz, ExchangePulse};
use xpulse_core::{CMatrix, Complex64};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn clebsch_gordan_examples() {
    let r = 1.0 / 2f64.sqrt();
    assert!((cg_coefficient(1.0, 1.0, 0.5, 0.5, 1.5, 1.5) - 1.0).abs() < 1e-15);
    assert!((cg_coefficient(0.5, 0.5, 0.5, -0.5, 1.0, 0.0) - r).abs() < 1e-15);
    assert!((cg_coefficient(0.5, -0.5, 0.5, 0.5, 0.0, 0.0) + r).abs() < 1e-15);
    // (1, 0; 1/2, 1/2 | 1/2, 1/2) = −1/√3
    assert!((cg_coefficient(1.0, 0.0, 0.5, 0.5, 0.5, 0.5) + 1.0 / 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn coupled_states_are_spin_eigenstates() {
    let trees = [
        (CouplingTree::star(0, 1, 2, 0), 3),
        (CouplingTree::star(0, 1, 2, 2), 3),
        (CouplingTree::node(CouplingTree::star(0, 1, 2, 2), CouplingTree::star(3, 4, 5, 0), 2), 6),
        (CouplingTree::node(CouplingTree::triangle(0, 1), CouplingTree::triangle(2, 3), 4), 4),
    ];
    for (tree, n) in trees {
        let s2 = tree.spin2() as i32;
        let s = s2 as f64 / 2.0;
        let op_s2 = total_spin_squared(n).unwrap();
        let op_sz = total_sz(n).unwrap();
        for m2 in (-s2..=s2).step_by(2) {
            let v = coupled_state(&tree, m2, n).unwrap();
            let a = v.amplitudes();
            assert!((v.norm() - 1.0).abs() < 1e-14);
            let eig = &op_s2 * a - a * c(s * (s + 1.0));
            assert!(eig.norm() < 1e-12, "{tree:?} m2={m2}");
            let z = &op_sz * a - a * c(m2 as f64 / 2.0);
            assert!(z.norm() < 1e-12);
        }
    }
}

#[test]
fn recoupling_closed_forms() {
    let f1 = Recoupling::F1.numeric().unwrap().entries;
    let s3 = 3f64.sqrt() / 2.0;
    let expected = CMatrix::from_row_slice(2, 2, &[c(-0.5), c(s3), c(s3), c(0.5)]);
    assert!(max_abs_diff(&f1, &expected) < 1e-14);

    let f2 = Recoupling::F2.numeric().unwrap().entries;
    let (a, b) = (1.0 / 3f64.sqrt(), (2.0f64 / 3.0).sqrt());
    let expected = CMatrix::from_row_slice(2, 2, &[c(-a), c(b), c(b), c(a)]);
    assert!(max_abs_diff(&f2, &expected) < 1e-14);

    let f3 = Recoupling::F3.numeric().unwrap().entries;
    let e = 8f64.sqrt() / 3.0;
    let expected = CMatrix::from_row_slice(2, 2, &[c(-1.0 / 3.0), c(e), c(e), c(1.0 / 3.0)]);
    assert!(max_abs_diff(&f3, &expected) < 1e-14);

    for which in [Recoupling::F1, Recoupling::F2, Recoupling::F3] {
        let m = which.numeric().unwrap().entries;
        assert!(max_abs_diff(&m, &analytic_f(which).entries) < 1e-12);
        assert!(max_abs_diff(&(&m * &m), &CMatrix::identity(2, 2)) < 1e-12);
    }
}

#[test]
fn identical_bases_recouple_to_identity() {
    for which in [Recoupling::F1, Recoupling::F2, Recoupling::F3] {
        let (s, t) = which.bases();
        for b in [s, t] {
            let m = recoupling_matrix(&b, &b, which.n_spins()).unwrap();
            assert!(max_abs_diff(&m.entries, &CMatrix::identity(2, 2)) < 1e-14);
        }
    }
}

#[test]
fn encoded_bases_are_orthonormal() {
    for g in [0, 1] {
        let b = EncodedBasis::new(g).unwrap();
        let gram = b.states.adjoint() * &b.states;
        assert!(max_abs_diff(&gram, &CMatrix::identity(4, 4)) < 1e-14);
        assert_eq!(b.m2, 2 * g as i32);
    }
    assert!(EncodedBasis::with_projection(0, 2).is_err());
}

proptest! {
    #[test]
    fn cg_rows_are_orthonormal(j1 in 0u32..5, j2 in 0u32..5, m1 in -4i32..=4) {
        prop_assume!(m1.abs() <= j1 as i32 && (m1 + j1 as i32) % 2 == 0);
        // Σ_{j} |⟨j1 m1 j2 m2|j m⟩|² = 1 for fixed (m1, m2)
        for m2 in (-(j2 as i32)..=j2 as i32).step_by(2) {
            let m = m1 + m2;
            let jmin = (j1 as i32 - j2 as i32).unsigned_abs();
            let total: f64 = (jmin..=j1 + j2)
                .step_by(2)
                .filter(|&j| m.abs() <= j as i32)
                .map(|j| cg_doubled(j1, m1, j2, m2, j, m).powi(2))
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gate_is_independent_of_projection(
        raw in proptest::collection::vec((0usize..5, 0.0..2.0f64), 1..8),
        g in 0u32..2,
    ) {
        let pulses: Vec<_> = raw.iter().map(|&(k, t)| ExchangePulse::new(k, k + 1, t).unwrap()).collect();
        let u = apply_pulses(6, &pulses).unwrap();
        let hi = extract_gate_unitary(&u, &EncodedBasis::new(g).unwrap());
        let m2 = if g == 0 { 0 } else { -2 };
        let other = extract_gate_unitary(&u, &EncodedBasis::with_projection(g, m2).unwrap());
        prop_assert!(max_abs_diff(&hi.gate, &other.gate) < 1e-12);
        prop_assert!((hi.leakage - other.leakage).abs() < 1e-12);
    }
}
