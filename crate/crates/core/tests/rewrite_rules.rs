use proptest::prelude::*;
use xpulse_core::pulse_sequence::{Layout, PulseSequence};
use xpulse_core::rewrite_engine::*;
use xpulse_core::spin_system::{apply_pulses, max_abs_diff, permutation_operator, ExchangePulse};

fn p(i: usize, j: usize, t: f64) -> ExchangePulse {
    ExchangePulse::new(i, j, t).unwrap()
}

fn seq(n: usize, pulses: Vec<ExchangePulse>) -> PulseSequence {
    PulseSequence::rewritten(n, Layout::Complete, pulses).unwrap()
}

fn same(a: &[ExchangePulse], b: &[ExchangePulse]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

#[test]
fn swap_moves_across_a_pulse() {
    let s = seq(3, vec![p(0, 1, 1.0), p(1, 2, 0.4)]);
    let out = apply_step(&s, &RewriteStep::SwapCommute { position: 0, mover: Mover::Left }).unwrap();
    assert!(same(out.pulses(), &[p(0, 2, 0.4), p(0, 1, 1.0)]));
    assert!(out.is_rewritten());
}

#[test]
fn three_halves_splits_into_swap_and_root_swap() {
    let s = seq(2, vec![p(0, 1, 1.5)]);
    let step = RewriteStep::MergeSplit { position: 0, split: Some(1.0) };
    let out = apply_step(&s, &step).unwrap();
    assert!(same(out.pulses(), &[p(0, 1, 1.0), p(0, 1, 0.5)]));
    assert!(verify_step(&s, &step));
}

#[test]
fn three_swaps_reduce_to_one() {
    let s = seq(3, vec![p(0, 1, 1.0), p(1, 2, 1.0), p(0, 1, 1.0)]);
    let out = apply_step(&s, &RewriteStep::ThreeSwapReduce { position: 0, expand: None }).unwrap();
    assert!(same(out.pulses(), &[p(0, 2, 1.0)]));
}

#[test]
fn commuting_without_relabeling_is_rejected() {
    let before = seq(3, vec![p(0, 1, 1.0), p(1, 2, 0.3)]);
    let naive = seq(3, vec![p(1, 2, 0.3), p(0, 1, 1.0)]);
    assert!(!verify_claim(&before, &naive));
}

#[test]
fn inapplicable_steps_are_errors() {
    let s = seq(3, vec![p(0, 1, 0.3), p(1, 2, 0.3)]);
    for step in [
        RewriteStep::SwapCommute { position: 0, mover: Mover::Left },
        RewriteStep::MergeSplit { position: 0, split: None },
        RewriteStep::SwapPairRemove { position: 0 },
        RewriteStep::ThreeSwapReduce { position: 0, expand: None },
        RewriteStep::DropZeroPulse { position: 1 },
        RewriteStep::MergeSplit { position: 7, split: Some(0.1) },
    ] {
        assert!(matches!(apply_step(&s, &step), Err(RewriteError::NotApplicable { .. })), "{step:?}");
        assert!(!verify_step(&s, &step));
    }
}

#[test]
fn rule_names_round_trip() {
    for r in Rule::ALL {
        assert_eq!(Rule::from_name(r.name()), Some(r));
    }
    assert_eq!(Rule::from_name("Nope"), None);
}

#[test]
fn mismatched_sequences_have_no_trace() {
    let a = seq(3, vec![p(0, 1, 0.3)]);
    let b = seq(3, vec![p(1, 2, 0.3)]);
    assert!(matches!(equivalence_trace(&a, &b), Err(RewriteError::NormalFormMismatch)));
}

fn arb_pulses(max_n: usize, max_len: usize) -> impl Strategy<Value = (usize, Vec<ExchangePulse>)> {
    (2..=max_n).prop_flat_map(move |n| {
        let pulse = (0..n, 0..n - 1, prop_oneof![3 => Just(1.0), 1 => Just(0.0), 1 => Just(0.5), 5 => 0.0..2.0f64])
            .prop_map(|(i, j, t)| (i, if j >= i { j + 1 } else { j }, t))
            .prop_map(|(i, j, t)| ExchangePulse::new(i, j, t).unwrap());
        (Just(n), proptest::collection::vec(pulse, 0..=max_len))
    })
}

fn arb_step(n: usize, len: usize) -> impl Strategy<Value = RewriteStep> {
    let pos = 0..len.max(1);
    prop_oneof![
        (pos.clone(), any::<bool>()).prop_map(|(position, l)| RewriteStep::SwapCommute {
            position,
            mover: if l { Mover::Left } else { Mover::Right },
        }),
        (pos.clone(), proptest::option::of(0.0..2.0f64)).prop_map(|(position, split)| RewriteStep::MergeSplit { position, split }),
        (0..=len, 0..n, 0..n).prop_map(|(position, i, j)| RewriteStep::SwapPairInsert { position, i, j }),
        pos.clone().prop_map(|position| RewriteStep::SwapPairRemove { position }),
        (pos.clone(), proptest::option::of((0..n, 0..n))).prop_map(|(position, expand)| RewriteStep::ThreeSwapReduce { position, expand }),
        pos.prop_map(|position| RewriteStep::DropZeroPulse { position }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn every_applicable_step_is_exact(
        (n, pulses, steps) in arb_pulses(6, 20).prop_flat_map(|(n, ps)| {
            let len = ps.len();
            (Just(n), Just(ps), proptest::collection::vec(arb_step(n, len), 1..12))
        })
    ) {
        let start = seq(n, pulses);
        let mut cur = start.clone();
        let mut applied = Vec::new();
        for step in &steps {
            if let Ok(next) = apply_step(&cur, step) {
                prop_assert!(unitary_gap(n, cur.pulses(), next.pulses()).unwrap() < EXACT_TOL, "{step:?}");
                applied.push(*step);
                cur = next;
            }
        }
        // replay reproduces the same list, and inverted steps walk back
        let replayed = replay(&start, &applied).unwrap();
        prop_assert!(same(replayed.pulses(), cur.pulses()));
        let drops = applied.iter().any(|s| s.rule() == Rule::DropZeroPulse);
        match invert_steps(start.pulses(), n, &applied) {
            Ok(back) => {
                prop_assert!(!drops);
                let restored = replay(&cur, &back).unwrap();
                prop_assert!(same(restored.pulses(), start.pulses()));
            }
            Err(RewriteError::NotInvertible { rule, .. }) => prop_assert!(drops && rule == Rule::DropZeroPulse),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn normalize_produces_a_replayable_trace((n, pulses) in arb_pulses(6, 20)) {
        let s = seq(n, pulses);
        let out = normalize(&s, &Layout::Complete).unwrap();
        prop_assert!(out.trace.check().is_ok());
        prop_assert!(out.core.pulses().iter().all(|p| !p.is_swap() && !p.is_identity()));
        // U(original) = sign · P(residual) · U(core)
        let u = apply_pulses(n, s.pulses()).unwrap().into_matrix();
        let core = apply_pulses(n, out.core.pulses()).unwrap().into_matrix();
        let perm = permutation_operator(n, &out.residual).unwrap().into_matrix();
        let rhs = perm * core * xpulse_core::Complex64::new(out.sign, 0.0);
        prop_assert!(max_abs_diff(&u, &rhs) < 1e-10);
        let linear = normalize(&s, &Layout::Linear).unwrap();
        prop_assert!(linear.trace.check().is_ok());
        prop_assert!(linear.core.len() <= s.len());
    }

    #[test]
    fn relabeled_swap_conjugates_are_equivalent((n, pulses) in arb_pulses(5, 10), a in 0usize..5, b in 0usize..5) {
        prop_assume!(a < n && b < n && a != b);
        // SWAP·X·SWAP against X relabeled: same normal form
        let s = ExchangePulse::new(a, b, 1.0).unwrap();
        let mut left = vec![s];
        left.extend(pulses.iter().copied());
        left.push(s);
        let right: Vec<_> = pulses.iter().map(|p| p.transposed(a, b)).collect();
        let trace = equivalence_trace(&seq(n, left), &seq(n, right)).unwrap();
        prop_assert!(trace.check().is_ok());
    }
}
