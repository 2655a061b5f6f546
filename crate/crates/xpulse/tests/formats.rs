use proptest::prelude::*;
use xpulse::acceptance::FW_TRACE_JSON;
use xpulse::formats::*;
use xpulse_core::fixtures::fw_equivalence_trace;
use xpulse_core::pulse_sequence::{Layout, PulseSequence};
use xpulse_core::rewrite_engine::EXACT_TOL;
use xpulse_core::spin_system::ExchangePulse;

#[test]
fn durations_are_reduced_on_load() {
    let f = SequenceFile::from_json(r#"{"n_spins": 2, "layout": "linear", "pulses": [{"i": 0, "j": 1, "t": 2.5}]}"#).unwrap();
    let seq = f.to_sequence().unwrap();
    assert!((seq.pulses()[0].t() - 0.5).abs() < 1e-15);
}

#[test]
fn malformed_files_are_rejected() {
    let cases = [
        r#"{"n_spins": 3, "layout": "linear", "pulses": [{"i": 1, "j": 1, "t": 0.5}]}"#,
        r#"{"n_spins": 3, "layout": "linear", "pulses": [{"i": 0, "j": 2, "t": 0.5}]}"#,
        r#"{"n_spins": 3, "layout": "linear", "pulses": [{"i": 0, "j": 3, "t": 0.5}]}"#,
        r#"{"n_spins": 0, "layout": "linear", "pulses": []}"#,
        r#"{"n_spins": 3, "layout": "ring", "pulses": []}"#,
        r#"{"n_spins": 3, "layout": "linear"}"#,
        r#"{"n_spins": 3, "layout": "linear", "pulses": [], "corrections": {"post": [{"i": 0, "j": 0, "t": 1}]}}"#,
        "not json",
    ];
    for c in cases {
        assert!(SequenceFile::from_json(c).is_err(), "{c}");
    }
    // the same non-adjacent pulse is fine under an explicit edge list
    let ok = r#"{"n_spins": 3, "layout": {"edges": [[0, 2]]}, "pulses": [{"i": 0, "j": 2, "t": 0.5}]}"#;
    assert!(SequenceFile::from_json(ok).is_ok());
}

#[test]
fn number_formatting() {
    assert_eq!(fmt10(0.5), "0.5");
    assert_eq!(fmt10(1.0 / 3.0), "0.3333333333");
    assert_eq!(fmt10(0.0), "0");
    assert!(fmt10(1.5e-15).contains('e'));
    assert_eq!(sig10(1.0 / 7.0), 0.1428571429);
}

#[test]
fn stored_fw_trace_matches_and_replays() {
    let stored = TraceFile::from_json(FW_TRACE_JSON).unwrap();
    let built = fw_equivalence_trace().unwrap();
    assert_eq!(stored, TraceFile::from_trace(&built));
    let trace = stored.to_trace().unwrap();
    assert!(trace.check().unwrap() < EXACT_TOL);
    assert_eq!(trace.steps, built.steps);
}

fn arb_sequence() -> impl Strategy<Value = PulseSequence> {
    (2usize..7).prop_flat_map(|n| {
        let pulse = (0..n - 1, 0.0..2.0f64).prop_map(|(k, t)| ExchangePulse::new(k, k + 1, t).unwrap());
        proptest::collection::vec(pulse, 0..15).prop_map(move |ps| PulseSequence::new(n, Layout::Linear, ps).unwrap())
    })
}

proptest! {
    #[test]
    fn sequence_files_round_trip(seq in arb_sequence()) {
        let file = SequenceFile::from_sequence(&seq);
        let back = SequenceFile::from_json(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_sequence().unwrap(), seq);
    }

    #[test]
    fn traces_round_trip(seq in arb_sequence()) {
        let n = xpulse_core::rewrite_engine::normalize(&seq, &Layout::Complete).unwrap();
        let file = TraceFile::from_trace(&n.trace);
        let back = TraceFile::from_json(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        let trace = back.to_trace().unwrap();
        prop_assert_eq!(&trace.steps, &n.trace.steps);
        prop_assert!(trace.check().is_ok());
    }
}
