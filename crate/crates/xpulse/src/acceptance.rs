//! The acceptance table: one row per criterion, each recomputed from scratch.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xpulse_core::coupling_basis::{analytic_f, Recoupling};
use xpulse_core::encoded_analysis::{self as ea, EncodedBasis, Makhlin, PseudospinKind};
use xpulse_core::fixtures::fw_equivalence_trace;
use xpulse_core::gate_library::{
    controlled_rotation_package, cphase_package, crot_t_max, fw_residual, fw_sequence, s_pulses, scaffold_angles,
    solve_durations, t_pulses, FwVariant,
};
use xpulse_core::pulse_sequence::{Layout, PulseSequence};
use xpulse_core::rewrite_engine::{apply_step, normalize, unitary_gap, Mover, RewriteStep, Rule};
use xpulse_core::spin_system::{
    aligned_deviation, apply_pulses, exchange_unitary, matrix_phase_distance, max_abs_diff, total_spin_squared,
    total_sz, ExchangePulse,
};
use xpulse_core::{su2, CMatrix, Complex64};

use crate::formats::{fmt10, TraceFile};

/// Stored FW rewrite trace.
pub const FW_TRACE_JSON: &str = include_str!("../fixtures/fw_trace.json");

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} {} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail
        )
    }
}

/// Accumulates named checks; the row passes when all of them do.
struct Row {
    ok: bool,
    detail: String,
}

impl Row {
    fn new() -> Self {
        Row {
            ok: true,
            detail: String::new(),
        }
    }

    fn check(&mut self, name: &str, value: f64, tol: f64) {
        let pass = value < tol;
        self.ok &= pass;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        let _ = write!(self.detail, "{name} {}{}{}", fmt10(value), if pass { " < " } else { " >= " }, fmt10(tol));
    }

    fn require(&mut self, name: &str, cond: bool) {
        self.ok &= cond;
        if !cond {
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            let _ = write!(self.detail, "{name} failed");
        }
    }

    fn note(&mut self, text: &str) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(text);
    }

    fn finish(self, id: u8, title: &'static str) -> CriterionResult {
        CriterionResult {
            id,
            title,
            passed: self.ok,
            detail: self.detail,
        }
    }
}

/// Tracks the worst value of one check across many cases.
struct Worst(f64);

impl Worst {
    fn new() -> Self {
        Worst(0.0)
    }

    fn add(&mut self, x: f64) {
        self.0 = if x.is_nan() { f64::INFINITY } else { self.0.max(x) };
    }
}

fn err_row(id: u8, title: &'static str, e: impl std::fmt::Display) -> CriterionResult {
    CriterionResult {
        id,
        title,
        passed: false,
        detail: format!("error: {e}"),
    }
}

pub fn criterion_1() -> CriterionResult {
    const TITLE: &str = "durations";
    let mut row = Row::new();
    let cases = [
        ("t(2pi/3)", 2.0 * PI / 3.0, 0.426548),
        ("t(acos(-7/8))", libm::acos(-7.0 / 8.0), 0.469699),
        ("t(acos(-11/16))", libm::acos(-11.0 / 16.0), 0.685037),
    ];
    for (name, phi, expected) in cases {
        match solve_durations(phi) {
            Ok(d) => {
                let dev = (d.t - expected).abs();
                row.ok &= dev <= 1e-5;
                row.note(&format!("{name} = {} (expected {expected}, |dev| {})", fmt10(d.t), fmt10(dev)));
            }
            Err(e) => return err_row(1, TITLE, e),
        }
    }
    row.finish(1, TITLE)
}

pub fn criterion_2() -> CriterionResult {
    let mut row = Row::new();
    let a = ea::cone_angles();
    let expected = [libm::acos(0.25), libm::acos(-7.0 / 8.0), libm::acos(-11.0 / 16.0)];
    let got = [a.phi1, a.phi2, a.phi3];
    let dev = got.iter().zip(&expected).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    row.check("angle deviation", dev, 1e-12);
    let (s1, s2, s3) = scaffold_angles();
    row.require("scaffold angles agree", [s1, s2, s3] == expected);
    let v = ea::cone_composite();
    row.check("|R n2 + z|", su2::max_abs3(su2::sub(v, [0.0, 0.0, -1.0])), 1e-12);
    row.finish(2, "cone angles")
}

fn cnot_distance(gate: &CMatrix) -> f64 {
    ea::makhlin_invariants(gate)
        .map(|m| m.distance(&Makhlin::cnot()))
        .unwrap_or(f64::INFINITY)
}

fn encoded_gates(pulses: &[ExchangePulse]) -> Result<[ea::EncodedGateReport; 2], String> {
    let u = apply_pulses(6, pulses).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2);
    for g in [0, 1] {
        let basis = EncodedBasis::new(g).map_err(|e| e.to_string())?;
        out.push(ea::extract_gate_unitary(&u, &basis));
    }
    Ok(out.try_into().expect("two sectors"))
}

fn controlled(m: &CMatrix) -> CMatrix {
    let mut t = CMatrix::identity(4, 4);
    t.view_mut((2, 2), (2, 2)).copy_from(m);
    t
}

pub fn criterion_3() -> CriterionResult {
    const TITLE: &str = "FW CNOT";
    let mut row = Row::new();
    let target = controlled(&su2::dot_sigma(ea::N0));
    let (mut leak, mut sector, mut gate, mut mk) = (Worst::new(), Worst::new(), Worst::new(), Worst::new());
    for variant in [FwVariant::Lhs, FwVariant::Rhs] {
        let mut pulses = fw_sequence(variant).pulses().to_vec();
        if variant == FwVariant::Rhs {
            pulses.extend(fw_residual());
        }
        let reps = match encoded_gates(&pulses) {
            Ok(r) => r,
            Err(e) => return err_row(3, TITLE, e),
        };
        for r in &reps {
            leak.add(r.leakage);
            gate.add(aligned_deviation(&r.gate, &target));
            mk.add(cnot_distance(&r.gate));
        }
        sector.add(matrix_phase_distance(&reps[0].gate, &reps[1].gate));
    }
    row.check("leakage", leak.0, 1e-10);
    row.check("sector phase distance", sector.0, 1e-10);
    row.check("|gate - diag(1,n0.sigma)|", gate.0, 1e-10);
    row.check("Makhlin vs CNOT", mk.0, 1e-10);
    match fw_equivalence_trace() {
        Ok(trace) => {
            let rhs = fw_sequence(FwVariant::Rhs);
            row.require("trace ends at the 18-pulse form", trace.end.approx_eq(&rhs));
            row.require("trace residual is SWAP(4,5)", trace.residual.len() == 1 && trace.residual[0].approx_eq(&fw_residual()[0]));
            match trace.check() {
                Ok(gap) => row.check("trace replay gap", gap, 1e-12),
                Err(e) => row.require(&format!("trace replay ({e})"), false),
            }
            let stored = TraceFile::from_json(FW_TRACE_JSON).and_then(|f| Ok((f.to_trace()?, f)));
            match stored {
                Ok((t, file)) => {
                    row.require("stored trace matches", file == TraceFile::from_trace(&trace));
                    row.require("stored trace replays", t.check().is_ok());
                }
                Err(e) => row.require(&format!("stored trace ({e})"), false),
            }
            row.note(&format!("{} rewrite steps", trace.steps.len()));
        }
        Err(e) => row.require(&format!("trace construction ({e})"), false),
    }
    row.finish(3, TITLE)
}

/// `t = 0, 0.2, …, 1.8` and the upper end of the legal interval.
pub fn crot_grid() -> Vec<f64> {
    let mut v: Vec<f64> = (0..10).map(|k| 0.2 * k as f64).collect();
    v.push(crot_t_max());
    v
}

pub fn criterion_4() -> CriterionResult {
    const TITLE: &str = "controlled rotation";
    let mut row = Row::new();
    let grid = crot_grid();
    let (mut leak, mut upper, mut angle) = (Worst::new(), Worst::new(), Worst::new());
    let mut counts_ok = true;
    for &t in &grid {
        let pkg = match controlled_rotation_package(t) {
            Ok(p) => p,
            Err(e) => return err_row(4, TITLE, e),
        };
        counts_ok &= pkg.core().len() == 28;
        let reps = match encoded_gates(pkg.full_sequence().pulses()) {
            Ok(r) => r,
            Err(e) => return err_row(4, TITLE, e),
        };
        let expected = match ea::phi_of_t(t) {
            Ok(x) => x,
            Err(e) => return err_row(4, TITLE, e),
        };
        for r in &reps {
            leak.add(r.leakage);
            let g00 = r.gate[(0, 0)];
            let g = r.gate.map(|z| z * (g00.conj() / g00.norm()));
            let mut dev = 0.0f64;
            for row_i in 0..4 {
                for col in 0..4 {
                    if row_i < 2 || col < 2 {
                        let want = if row_i == col { 1.0 } else { 0.0 };
                        dev = dev.max((g[(row_i, col)] - Complex64::new(want, 0.0)).norm());
                    }
                }
            }
            upper.add(dev);
            let m = g.view((2, 2), (2, 2)).into_owned();
            match ea::rotation_angle_with_phase(&m, -PI * t / 2.0) {
                Ok(x) => angle.add((x - expected).abs()),
                Err(_) => angle.add(f64::INFINITY),
            }
            if t == 0.0 {
                row.check("t=0 identity", aligned_deviation(&r.gate, &CMatrix::identity(4, 4)), 1e-10);
            }
            if t == 1.0 {
                row.check("t=1 Makhlin vs CNOT", cnot_distance(&r.gate), 1e-10);
            }
        }
    }
    row.require("core has 28 pulses", counts_ok);
    row.check("leakage", leak.0, 1e-10);
    row.check("|diag(1,M) structure|", upper.0, 1e-9);
    row.check("|angle - phi_of_t|", angle.0, 1e-9);
    row.note(&format!("{} points", grid.len()));
    row.finish(4, TITLE)
}

pub fn criterion_5() -> CriterionResult {
    const TITLE: &str = "CPHASE";
    let mut row = Row::new();
    let (mut leak, mut off, mut inv) = (Worst::new(), Worst::new(), Worst::new());
    let mut counts_ok = true;
    for k in 1..16 {
        let phi = k as f64 * PI / 8.0;
        let pkg = match cphase_package(phi) {
            Ok(p) => p,
            Err(e) => return err_row(5, TITLE, e),
        };
        counts_ok &= pkg.core().len() == 25;
        let reps = match encoded_gates(pkg.full_sequence().pulses()) {
            Ok(r) => r,
            Err(e) => return err_row(5, TITLE, e),
        };
        for r in &reps {
            leak.add(r.leakage);
            off.add(ea::off_diagonal(&r.gate));
            inv.add(ea::angle_gap(r.diagonal_phase_invariant.unwrap_or(f64::NAN), -phi));
            if k == 8 {
                row.check("phi=pi Makhlin vs CNOT", cnot_distance(&r.gate), 1e-10);
            }
        }
    }
    row.require("core has 25 pulses", counts_ok);
    row.check("leakage", leak.0, 1e-10);
    row.check("off-diagonal", off.0, 1e-9);
    row.check("|invariant + phi|", inv.0, 1e-9);
    row.finish(5, TITLE)
}

pub fn criterion_6() -> CriterionResult {
    const TITLE: &str = "complete-layout reduction";
    let mut row = Row::new();
    let mut cases: Vec<(String, PulseSequence, usize, usize)> = Vec::new();
    for t in crot_grid() {
        // t = 0 and t = 1 turn pulses into identities/SWAPs and reduce further
        if t == 0.0 || t == 1.0 {
            continue;
        }
        match controlled_rotation_package(t) {
            Ok(p) => cases.push((format!("crot t={}", fmt10(t)), p.core().clone(), 28, 22)),
            Err(e) => return err_row(6, TITLE, e),
        }
    }
    for k in 1..16 {
        match cphase_package(k as f64 * PI / 8.0) {
            Ok(p) => cases.push((format!("cphase {k}pi/8"), p.core().clone(), 25, 23)),
            Err(e) => return err_row(6, TITLE, e),
        }
    }
    cases.push(("fw".into(), fw_sequence(FwVariant::Rhs), 18, 12));
    let mut gap = Worst::new();
    for (name, seq, before, after) in &cases {
        match normalize(seq, &Layout::Complete) {
            Ok(n) => {
                row.require(
                    &format!("{name}: {} -> {} (expected {before} -> {after})", seq.len(), n.core.len()),
                    seq.len() == *before && n.core.len() == *after,
                );
                row.require(&format!("{name}: residual absorbable"), n.residual_absorbable());
                match n.trace.check() {
                    Ok(g) => gap.add(g),
                    Err(e) => row.require(&format!("{name}: trace ({e})"), false),
                }
            }
            Err(e) => row.require(&format!("{name}: normalize ({e})"), false),
        }
    }
    row.check("trace gap", gap.0, 1e-12);
    row.note(&format!("28 -> 22, 25 -> 23, 18 -> 12 over {} sequences", cases.len()));
    row.finish(6, TITLE)
}

pub fn criterion_7() -> CriterionResult {
    const TITLE: &str = "recoupling";
    let mut row = Row::new();
    for which in [Recoupling::F1, Recoupling::F2, Recoupling::F3] {
        match which.numeric() {
            Ok(num) => row.check(
                &format!("{which:?}"),
                max_abs_diff(&num.entries, &analytic_f(which).entries),
                1e-12,
            ),
            Err(e) => return err_row(7, TITLE, e),
        }
    }
    match ea::compute_f0() {
        Ok(f0) => row.check("F0", max_abs_diff(&f0.matrix, &su2::dot_sigma(ea::F0_AXIS)), 1e-12),
        Err(e) => return err_row(7, TITLE, e),
    }
    match ea::powt_factor() {
        Ok(f) => {
            let want = su2::diag(Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0));
            row.check("POWT", max_abs_diff(&f, &want), 1e-12);
        }
        Err(e) => return err_row(7, TITLE, e),
    }
    row.finish(7, TITLE)
}

pub fn criterion_8() -> CriterionResult {
    const TITLE: &str = "T and S contracts";
    let mut row = Row::new();
    let (mut lower, mut leak) = (Worst::new(), Worst::new());
    for t in [0.1, 0.45, 0.9, 1.3, 1.75] {
        let block = t_pulses(t, 0)
            .map_err(|e| e.to_string())
            .and_then(|p| apply_pulses(4, &p).map_err(|e| e.to_string()))
            .and_then(|u| ea::star_block(&u, 4, 0).map_err(|e| e.to_string()));
        match block {
            Ok(b) => {
                let target = controlled(&ea::t_gate_closed_form(t));
                let ph = xpulse_core::spin_system::best_phase(&b.matrix, &target);
                let aligned = target.map(|z| z * ph);
                lower.add(max_abs_diff(
                    &b.matrix.view((2, 2), (2, 2)).into_owned(),
                    &aligned.view((2, 2), (2, 2)).into_owned(),
                ));
                lower.add(max_abs_diff(&b.matrix, &aligned));
                leak.add(b.leakage);
            }
            Err(e) => return err_row(8, TITLE, e),
        }
    }
    row.check("T lower block", lower.0, 1e-10);
    let s = apply_pulses(4, &s_pulses(0))
        .map_err(|e| e.to_string())
        .and_then(|u| ea::star_block(&u, 4, 0).map_err(|e| e.to_string()));
    match s {
        Ok(b) => {
            let one = Complex64::new(1.0, 0.0);
            let target = CMatrix::from_diagonal(&xpulse_core::CVector::from_column_slice(&[one, one, -one, -one]));
            row.check("S vs diag(1,-1)", aligned_deviation(&b.matrix, &target), 1e-10);
            leak.add(b.leakage);
        }
        Err(e) => return err_row(8, TITLE, e),
    }
    row.check("out-of-c", leak.0, 1e-12);
    row.finish(8, TITLE)
}

fn random_pulse(rng: &mut ChaCha8Rng, n: usize) -> ExchangePulse {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let t = match rng.gen_range(0..10) {
        0..=2 => 1.0,
        3 => 0.0,
        _ => rng.gen_range(0.0..2.0),
    };
    ExchangePulse::new(i, j, t).expect("distinct indices")
}

fn random_step(rng: &mut ChaCha8Rng, pulses: &[ExchangePulse], n: usize) -> RewriteStep {
    let len = pulses.len().max(1);
    let position = rng.gen_range(0..len);
    match rng.gen_range(0..6) {
        0 => RewriteStep::SwapCommute {
            position,
            mover: if rng.gen_bool(0.5) { Mover::Left } else { Mover::Right },
        },
        1 => RewriteStep::MergeSplit {
            position,
            split: if rng.gen_bool(0.5) { None } else { Some(rng.gen_range(0.0..2.0)) },
        },
        2 => {
            let p = random_pulse(rng, n);
            RewriteStep::SwapPairInsert {
                position: rng.gen_range(0..=pulses.len()),
                i: p.i(),
                j: p.j(),
            }
        }
        3 => RewriteStep::SwapPairRemove { position },
        4 => {
            let expand = match pulses.get(position) {
                Some(p) if n > 2 && rng.gen_bool(0.5) => {
                    let lead = if rng.gen_bool(0.5) { p.i() } else { p.j() };
                    let via = (0..n).filter(|&k| !p.touches(k)).nth(rng.gen_range(0..n - 2));
                    via.map(|v| (lead, v))
                }
                _ => None,
            };
            RewriteStep::ThreeSwapReduce { position, expand }
        }
        _ => RewriteStep::DropZeroPulse { position },
    }
}

/// Rewrite-rule exactness on random sequences; returns (worst gap, applied counts per rule).
pub fn random_rewrite_suite(seed: u64, sequences: usize) -> (f64, [usize; 6]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst::new();
    let mut applied = [0usize; 6];
    for _ in 0..sequences {
        let n = rng.gen_range(2..=6);
        let len = rng.gen_range(0..=20);
        let pulses: Vec<ExchangePulse> = (0..len).map(|_| random_pulse(&mut rng, n)).collect();
        let mut seq = PulseSequence::rewritten(n, Layout::Complete, pulses).expect("valid indices");
        let start = seq.clone();
        for _ in 0..40 {
            let step = random_step(&mut rng, seq.pulses(), n);
            if let Ok(next) = apply_step(&seq, &step) {
                if next.len() > 20 {
                    continue;
                }
                worst.add(unitary_gap(n, seq.pulses(), next.pulses()).unwrap_or(f64::INFINITY));
                let k = Rule::ALL.iter().position(|r| *r == step.rule()).expect("known rule");
                applied[k] += 1;
                seq = next;
            }
        }
        worst.add(unitary_gap(n, start.pulses(), seq.pulses()).unwrap_or(f64::INFINITY));
    }
    (worst.0, applied)
}

fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs_diff(&(a * b), &(b * a))
}

pub fn criterion_9() -> CriterionResult {
    const TITLE: &str = "property suites";
    let mut row = Row::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut merge, mut inverse, mut period) = (Worst::new(), Worst::new(), Worst::new());
    let mut conserved = Worst::new();
    let mut ops = Vec::new();
    for n in 2..=6 {
        ops.push((total_sz(n).expect("small register"), total_spin_squared(n).expect("small register")));
    }
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let p = random_pulse(&mut rng, n);
        let a = rng.gen_range(0.0..2.0);
        let b = rng.gen_range(0.0..2.0);
        let u = |t: f64| exchange_unitary(n, &p.with_duration(t)).expect("valid pulse").into_matrix();
        merge.add(max_abs_diff(&(u(b) * u(a)), &u(a + b)));
        let inv = exchange_unitary(n, &p.inverse()).expect("valid pulse").into_matrix();
        inverse.add(max_abs_diff(&(&inv * u(p.t())), &CMatrix::identity(1 << n, 1 << n)));
        // closed form at t + 2 against the reduced pulse; U(1) = −P
        let swap = exchange_unitary(n, &p.with_duration(1.0)).expect("valid pulse").into_matrix();
        let e = su2::phase(-PI * (p.t() + 2.0));
        let raw = CMatrix::identity(1 << n, 1 << n) * ((Complex64::new(1.0, 0.0) + e) / 2.0) + swap * ((Complex64::new(1.0, 0.0) - e) / 2.0);
        period.add(max_abs_diff(&raw, &u(p.t())));
        let (sz, s2) = &ops[n - 2];
        conserved.add(commutator_norm(&u(p.t()), sz).max(commutator_norm(&u(p.t()), s2)));
    }
    row.check("merge", merge.0, 1e-12);
    row.check("inverse", inverse.0, 1e-12);
    row.check("periodicity", period.0, 1e-12);
    row.check("[U, S^2], [U, Sz]", conserved.0, 1e-12);
    let (gap, applied) = random_rewrite_suite(0x00c0_ffee, 200);
    row.check("rewrite gap (200 sequences)", gap, 1e-12);
    row.require("every rule exercised", applied.iter().all(|&c| c > 0));
    let mut pseudo = Worst::new();
    for kind in PseudospinKind::ALL {
        for _ in 0..10 {
            let phi = rng.gen_range(0.0..2.0 * PI);
            pseudo.add(ea::pseudospin_check(kind, phi).unwrap_or(f64::INFINITY));
        }
    }
    row.check("pseudospin oracles", pseudo.0, 1e-10);
    row.note(&format!("rule applications {applied:?}"));
    row.finish(9, TITLE)
}

/// Runs all nine rows in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ]
}
