use std::f64::consts::PI;

use proptest::prelude::*;
use xpulse_core::pulse_sequence::{pulse_count, CountMode, Layout, PulseSequence};
use xpulse_core::spin_system::*;
use xpulse_core::{CMatrix, Complex64};

const EXACT: f64 = 1e-12;

fn p(i: usize, j: usize, t: f64) -> ExchangePulse {
    ExchangePulse::new(i, j, t).unwrap()
}

fn mat(n: usize, pulse: ExchangePulse) -> CMatrix {
    exchange_unitary(n, &pulse).unwrap().into_matrix()
}

fn pulse_strategy(max_n: usize) -> impl Strategy<Value = (usize, ExchangePulse)> {
    (2..=max_n)
        .prop_flat_map(|n| (Just(n), 0..n, 0..n - 1, 0.0..2.0f64))
        .prop_map(|(n, i, j, t)| {
            let j = if j >= i { j + 1 } else { j };
            (n, p(i, j, t))
        })
}

#[test]
fn two_spin_examples() {
    assert!(max_abs_diff(&mat(2, p(0, 1, 0.0)), &CMatrix::identity(4, 4)) < EXACT);

    let swap = mat(2, p(0, 1, 1.0));
    let perm = permutation_operator(2, &[1, 0]).unwrap().into_matrix();
    assert!(max_abs_diff(&swap, &(-perm)) < EXACT);
    // |↑↑⟩ ↦ −|↑↑⟩
    assert!((swap[(0, 0)] + Complex64::new(1.0, 0.0)).norm() < EXACT);

    let half = mat(2, p(0, 1, 0.5));
    let r = 1.0 / 2f64.sqrt();
    let singlet = CMatrix::from_column_slice(4, 1, &[0.0, r, -r, 0.0].map(|x| Complex64::new(x, 0.0)));
    assert!(max_abs_diff(&(&half * &singlet), &singlet) < EXACT);
    let minus_i = Complex64::new(0.0, -1.0);
    for k in [0, 3] {
        assert!((half[(k, k)] - minus_i).norm() < EXACT);
    }
    let triplet0 = CMatrix::from_column_slice(4, 1, &[0.0, r, r, 0.0].map(|x| Complex64::new(x, 0.0)));
    assert!(max_abs_diff(&(&half * &triplet0), &(&triplet0 * minus_i)) < EXACT);
}

#[test]
fn permutation_examples() {
    assert!(max_abs_diff(permutation_operator(3, &[0, 1, 2]).unwrap().matrix(), &CMatrix::identity(8, 8)) < EXACT);
    let p01 = permutation_operator(2, &[1, 0]).unwrap().into_matrix();
    assert!(max_abs_diff(&(&p01 * &p01), &CMatrix::identity(4, 4)) < EXACT);
    assert!(permutation_operator(3, &[0, 0, 1]).is_err());
}

#[test]
fn phase_distance_examples() {
    let u = apply_pulses(3, &[p(0, 1, 0.3), p(1, 2, 1.1)]).unwrap();
    assert!(phase_distance(&u, &u).unwrap() < 1e-14);
    let shifted = Unitary::from_matrix(u.matrix() * Complex64::from_polar(1.0, PI / 7.0)).unwrap();
    assert!(phase_distance(&u, &shifted).unwrap() < 1e-14);
    let id = Unitary::identity(4);
    let p01 = permutation_operator(2, &[1, 0]).unwrap();
    assert!((phase_distance(&id, &p01).unwrap() - 0.5).abs() < 1e-14);
}

#[test]
fn sequence_examples() {
    let empty = PulseSequence::empty(4, Layout::Linear);
    assert!(max_abs_diff(apply_sequence(&empty).unwrap().matrix(), &CMatrix::identity(16, 16)) < EXACT);
    assert_eq!(pulse_count(&empty, CountMode::All), 0);
    let undo = apply_pulses(3, &[p(1, 2, 0.37), p(1, 2, 2.0 - 0.37)]).unwrap();
    assert!(max_abs_diff(undo.matrix(), &CMatrix::identity(8, 8)) < EXACT);
    assert!((p(0, 1, 2.5).t() - 0.5).abs() < 1e-15);
    assert!(ExchangePulse::new(1, 1, 0.5).is_err());
    assert!(ExchangePulse::new(0, 1, f64::NAN).is_err());
}

#[test]
fn total_spin_operators_are_consistent() {
    // S² eigenvalues on two spins: 0 (singlet) and 2 (triplet)
    let s2 = total_spin_squared(2).unwrap();
    let tr = s2.trace();
    assert!((tr - Complex64::new(6.0, 0.0)).norm() < EXACT);
    let sz = total_sz(3).unwrap();
    assert!((sz[(0, 0)] - Complex64::new(1.5, 0.0)).norm() < EXACT);
    assert!((sz[(7, 7)] + Complex64::new(1.5, 0.0)).norm() < EXACT);
}

proptest! {
    #[test]
    fn merge_is_exact((n, pulse) in pulse_strategy(5), a in 0.0..2.0f64, b in 0.0..2.0f64) {
        let merged = mat(n, pulse.with_duration(a + b));
        let product = mat(n, pulse.with_duration(b)) * mat(n, pulse.with_duration(a));
        prop_assert!(max_abs_diff(&merged, &product) < EXACT);
    }

    #[test]
    fn inverse_is_exact((n, pulse) in pulse_strategy(5)) {
        let u = apply_pulses(n, &[pulse, pulse.inverse()]).unwrap();
        prop_assert!(max_abs_diff(u.matrix(), &CMatrix::identity(1 << n, 1 << n)) < EXACT);
        let seq = [pulse, p(0, 1, 0.9), pulse.with_duration(1.3)];
        let mut all = seq.to_vec();
        all.extend(invert_pulses(&seq));
        let u = apply_pulses(n, &all).unwrap();
        prop_assert!(max_abs_diff(u.matrix(), &CMatrix::identity(1 << n, 1 << n)) < EXACT);
    }

    #[test]
    fn periodicity((n, pulse) in pulse_strategy(4), k in -3i32..3) {
        let shifted = pulse.with_duration(pulse.t() + 2.0 * k as f64);
        prop_assert!(pulse.approx_eq(&shifted));
        prop_assert!(max_abs_diff(&mat(n, shifted), &mat(n, pulse)) < EXACT);
    }

    #[test]
    fn pulses_conserve_total_spin((n, pulse) in pulse_strategy(6)) {
        let u = mat(n, pulse);
        for op in [total_sz(n).unwrap(), total_spin_squared(n).unwrap()] {
            prop_assert!(max_abs_diff(&(&u * &op), &(&op * &u)) < EXACT);
        }
        prop_assert!(exchange_unitary(n, &pulse).unwrap().unitarity_error() < EXACT);
    }

    #[test]
    fn relabeling_is_conjugation((n, pulse) in pulse_strategy(5), seed in 0u64..1000) {
        // a deterministic permutation from the seed
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for k in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(k, (s >> 33) as usize % (k + 1));
        }
        let pm = permutation_operator(n, &perm).unwrap().into_matrix();
        let lhs = mat(n, pulse.relabel(&perm));
        let rhs = &pm * mat(n, pulse) * pm.adjoint();
        prop_assert!(max_abs_diff(&lhs, &rhs) < EXACT);
    }

    #[test]
    fn permutation_composition(seed in 0u64..5000) {
        let n = 4;
        let mk = |mut s: u64| {
            let mut perm: Vec<usize> = (0..n).collect();
            for k in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(k, (s >> 33) as usize % (k + 1));
            }
            perm
        };
        let sigma = mk(seed);
        let tau = mk(seed ^ 0x9e37);
        let comp: Vec<usize> = (0..n).map(|k| sigma[tau[k]]).collect();
        let lhs = permutation_operator(n, &comp).unwrap().into_matrix();
        let rhs = permutation_operator(n, &sigma).unwrap().into_matrix() * permutation_operator(n, &tau).unwrap().into_matrix();
        prop_assert!(max_abs_diff(&lhs, &rhs) < EXACT);
    }
}
