//! Synthesis of the named pulse sequences and their matrix contracts.
//!
//! Durations are in units where `t = 1` is a SWAP. All sequences are lists in
//! time order; the first pulse acts first.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::coupling_basis::{basis_matrix, CouplingError, CouplingTree as T};
use crate::encoded_analysis::{self as ea, EncodedBasis};
use crate::fixtures;
use crate::pulse_sequence::{GateSequencePackage, Layout, PulseSequence, SequenceError};
use crate::spin_system::{apply_pulses, best_phase, invert_pulses, max_abs_diff, CMatrix, ExchangePulse, SpinError};
use crate::su2;

/// `t1` as printed for `φ = 2π/3`.
pub const T1_PRINTED: f64 = 0.426548;
/// Printed scaffold duration associated with `arccos(−7/8)`.
pub const T2_PRINTED: f64 = 0.469699;
/// Printed scaffold duration associated with `arccos(−11/16)`.
pub const T3_PRINTED: f64 = 0.685037;

/// Contract tolerance for entrywise deviations.
pub const CONTRACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GateError {
    AngleOutOfRange(f64),
    DurationOutOfRange(f64),
    OffsetNotSupported,
    Sequence(SequenceError),
    Simulation(SpinError),
    Coupling(CouplingError),
    Fixture(&'static str),
}

impl fmt::Display for GateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateError::AngleOutOfRange(p) => write!(f, "angle {p} outside [0, 2π]"),
            GateError::DurationOutOfRange(t) => write!(f, "duration {t} outside the legal interval"),
            GateError::OffsetNotSupported => write!(f, "this gate is fixed to the six-spin register"),
            GateError::Sequence(e) => write!(f, "{e}"),
            GateError::Simulation(e) => write!(f, "{e}"),
            GateError::Coupling(e) => write!(f, "{e}"),
            GateError::Fixture(m) => write!(f, "fixture error: {m}"),
        }
    }
}

impl From<SequenceError> for GateError {
    fn from(e: SequenceError) -> Self {
        GateError::Sequence(e)
    }
}

impl From<SpinError> for GateError {
    fn from(e: SpinError) -> Self {
        GateError::Simulation(e)
    }
}

impl From<CouplingError> for GateError {
    fn from(e: CouplingError) -> Self {
        GateError::Coupling(e)
    }
}

fn p(i: usize, j: usize, t: f64) -> ExchangePulse {
    ExchangePulse::raw(i, j, t)
}

fn shift(pulses: &[ExchangePulse], offset: usize) -> Vec<ExchangePulse> {
    pulses
        .iter()
        .map(|q| p(q.i() + offset, q.j() + offset, q.t()))
        .collect()
}

fn check_angle(phi: f64) -> Result<(), GateError> {
    if phi.is_finite() && (-1e-12..=2.0 * PI + 1e-12).contains(&phi) {
        Ok(())
    } else {
        Err(GateError::AngleOutOfRange(phi))
    }
}

/// Durations `(t, t̄)` of a `U3(φ)` sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationPair {
    pub t: f64,
    pub t_bar: f64,
}

impl DurationPair {
    pub fn s(&self) -> f64 {
        2.0 - self.t
    }

    pub fn s_bar(&self) -> f64 {
        2.0 - self.t_bar
    }

    /// `π(t + t̄ − 1)`.
    pub fn phi(&self) -> f64 {
        PI * (self.t + self.t_bar - 1.0)
    }

    /// `tan(πt/2)·tan(πt̄/2) + 2`.
    pub fn tan_residual(&self) -> f64 {
        libm::tan(PI * self.t / 2.0) * libm::tan(PI * self.t_bar / 2.0) + 2.0
    }
}

/// `sin a sin b + 2 cos a cos b`: the tan-product condition times `cos a cos b`.
fn product_residual(t: f64, phi: f64) -> f64 {
    let a = PI * t / 2.0;
    let b = PI * (1.0 + phi / PI - t) / 2.0;
    libm::sin(a) * libm::sin(b) + 2.0 * libm::cos(a) * libm::cos(b)
}

/// Solves `tan(πt/2)tan(πt̄/2) = −2`, `φ = π(t + t̄ − 1)` on the branch `t ∈ [0, 1]`.
///
/// At the endpoints the tangent condition degenerates: `φ = 0` returns
/// `(0, 1)` and `φ = 2π` returns `(1, 2)`.
pub fn solve_durations(phi: f64) -> Result<DurationPair, GateError> {
    check_angle(phi)?;
    let phi = phi.clamp(0.0, 2.0 * PI);
    if phi <= 1e-15 {
        return Ok(DurationPair { t: 0.0, t_bar: 1.0 });
    }
    if phi >= 2.0 * PI - 1e-15 {
        return Ok(DurationPair { t: 1.0, t_bar: 2.0 });
    }
    // residual is −2 sin(φ/2) < 0 at t = 0 and sin(φ/2)·… > 0 at t = 1
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if product_residual(mid, phi) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok(DurationPair {
        t,
        t_bar: 1.0 + phi / PI - t,
    })
}

/// Upper end of the controlled-rotation duration interval, `4·arctan(√(2−√3))`.
pub fn crot_t_max() -> f64 {
    4.0 * libm::atan(libm::sqrt(2.0 - libm::sqrt(3.0)))
}

/// `U3(φ)` (pattern `(q,r) t, (p,q) t̄, (q,r) t`) or the mirrored `Ū3(φ)`
/// (`(p,q) t, (q,r) t̄, (p,q) t`) on the triple `[p, q, r]`.
pub fn u3_pulses(phi: f64, mirrored: bool, triple: [usize; 3]) -> Result<Vec<ExchangePulse>, GateError> {
    let d = solve_durations(phi)?;
    let [a, b, c] = triple;
    let (outer, inner) = if mirrored { ((a, b), (b, c)) } else { ((b, c), (a, b)) };
    Ok(alloc::vec![
        p(outer.0, outer.1, d.t),
        p(inner.0, inner.1, d.t_bar),
        p(outer.0, outer.1, d.t),
    ])
}

/// Three-spin `U3(φ)` / `Ū3(φ)`.
pub fn u3_sequence(phi: f64, mirrored: bool) -> Result<PulseSequence, GateError> {
    Ok(PulseSequence::new(3, Layout::Linear, u3_pulses(phi, mirrored, [0, 1, 2])?)?)
}

/// Fixed prefix of `U4`: `U3(2π/3)` on the first three spins, then a 2/3 pulse on the last pair.
fn u4_scaffold(offset: usize) -> Vec<ExchangePulse> {
    let mut x = u3_pulses(2.0 * PI / 3.0, false, [offset, offset + 1, offset + 2]).expect("angle in range");
    x.push(p(offset + 2, offset + 3, 2.0 / 3.0));
    x
}

/// `U4(φ)` on spins `offset..offset+4`: scaffold, `U3(φ)`, inverse scaffold.
pub fn u4_pulses(phi: f64, offset: usize) -> Result<Vec<ExchangePulse>, GateError> {
    let x = u4_scaffold(offset);
    let mut out = x.clone();
    out.extend(u3_pulses(phi, false, [offset, offset + 1, offset + 2])?);
    out.extend(invert_pulses(&x));
    Ok(out)
}

pub fn u4_sequence(phi: f64) -> Result<PulseSequence, GateError> {
    Ok(PulseSequence::new(4, Layout::Linear, u4_pulses(phi, 0)?)?)
}

/// `V0`: `U12(1/2)` then `U23(3/2)` (four-spin labels 0..3).
pub fn v0_pulses(offset: usize) -> Vec<ExchangePulse> {
    shift(&[p(0, 1, 0.5), p(1, 2, 1.5)], offset)
}

/// `V = V0·V1` with `V1 = U34(3/2)U23(1/2)` acting first.
pub fn v_pulses(offset: usize) -> Vec<ExchangePulse> {
    let mut v = shift(&[p(1, 2, 0.5), p(2, 3, 1.5)], offset);
    v.extend(v0_pulses(offset));
    v
}

/// `T0(t) = V0⁻¹·U12(t)U34(t)·V0`; at `t = 1` this is the `R` block of the
/// FW sequence.
pub fn t0_pulses(t: f64, offset: usize) -> Vec<ExchangePulse> {
    let v0 = v0_pulses(offset);
    let mut out = v0.clone();
    out.push(p(offset, offset + 1, t));
    out.push(p(offset + 2, offset + 3, t));
    out.extend(invert_pulses(&v0));
    out
}

/// `W`: a 2/3 pulse on the first pair, then `Ū3(2π/3)` on the last three spins.
pub fn w_pulses(offset: usize) -> Vec<ExchangePulse> {
    let mut w = alloc::vec![p(offset, offset + 1, 2.0 / 3.0)];
    w.extend(u3_pulses(2.0 * PI / 3.0, true, [offset + 1, offset + 2, offset + 3]).expect("angle in range"));
    w
}

/// `T(t) = U34(2s)·V⁻¹·U12(t)U34(t)·V` on four spins.
pub fn t_pulses(t: f64, offset: usize) -> Result<Vec<ExchangePulse>, GateError> {
    if !t.is_finite() || !(0.0..2.0).contains(&t) {
        return Err(GateError::DurationOutOfRange(t));
    }
    let v = v_pulses(offset);
    let mut out = v.clone();
    out.push(p(offset + 2, offset + 3, t));
    out.push(p(offset, offset + 1, t));
    out.extend(invert_pulses(&v));
    out.push(p(offset + 2, offset + 3, 2.0 * (2.0 - t)));
    Ok(out)
}

pub fn t_sequence(t: f64) -> Result<PulseSequence, GateError> {
    Ok(PulseSequence::new(4, Layout::Linear, t_pulses(t, 0)?)?)
}

/// `S = W⁻¹·U12(1)U34(1)·W`.
pub fn s_pulses(offset: usize) -> Vec<ExchangePulse> {
    let w = w_pulses(offset);
    let mut out = w.clone();
    out.push(p(offset, offset + 1, 1.0));
    out.push(p(offset + 2, offset + 3, 1.0));
    out.extend(invert_pulses(&w));
    out
}

pub fn s_sequence() -> PulseSequence {
    PulseSequence::new(4, Layout::Linear, s_pulses(0)).expect("nearest-neighbour pulses")
}

/// Controlled rotation `diag(1, 𝕄(t))` on the six-spin register.
///
/// Core: `S`, `SWAP(1,2)`, `T` with its intra-qubit ends removed, `SWAP(1,2)`, `S`,
/// with `S` and `T` on spins 2–5.
pub fn controlled_rotation_package(t: f64) -> Result<GateSequencePackage, GateError> {
    if !t.is_finite() || !(0.0..=crot_t_max() + 1e-12).contains(&t) {
        return Err(GateError::DurationOutOfRange(t));
    }
    let full_t = t_pulses(t, 2)?;
    // T = [V1 (2 pulses) | 6 core pulses | V1⁻¹ (2 pulses), U34(2s)]
    let pre = full_t[..2].to_vec();
    let t_core = &full_t[2..8];
    let post = full_t[8..].to_vec();
    let s = s_pulses(2);
    let mut core = s.clone();
    core.push(p(1, 2, 1.0));
    core.extend_from_slice(t_core);
    core.push(p(1, 2, 1.0));
    core.extend(s);
    Ok(GateSequencePackage::new(
        PulseSequence::new(6, Layout::Linear, core)?,
        PulseSequence::new(6, Layout::Linear, pre)?,
        PulseSequence::new(6, Layout::Linear, post)?,
    )?)
}

/// `arccos(1/4)`, `arccos(−7/8)`, `arccos(−11/16)`.
pub fn scaffold_angles() -> (f64, f64, f64) {
    (libm::acos(0.25), libm::acos(-7.0 / 8.0), libm::acos(-11.0 / 16.0))
}

/// One-spin permutation moving spin 3 past the pair (4,5).
fn powt() -> Vec<ExchangePulse> {
    alloc::vec![p(3, 4, 1.0), p(4, 5, 1.0)]
}

/// `POWT · U4(φ) · POWT⁻¹` with `U4` on spins 1–4.
fn u4_wrapped(phi: f64) -> Result<Vec<ExchangePulse>, GateError> {
    let w = powt();
    let mut out = w.clone();
    out.extend(u4_pulses(phi, 1)?);
    out.extend(invert_pulses(&w));
    Ok(out)
}

/// Merges adjacent same-pair pulses (sums durations mod 2).
pub fn merge_adjacent(pulses: &[ExchangePulse]) -> Vec<ExchangePulse> {
    let mut out: Vec<ExchangePulse> = Vec::with_capacity(pulses.len());
    for q in pulses {
        match out.last_mut() {
            Some(last) if last.same_pair(q) => *last = last.with_duration(last.t() + q.t()),
            _ => out.push(*q),
        }
    }
    out
}

/// `U5(φ) = Q·U4'(φ)·Q⁻¹` with `Q = U3(φ3)Ū3(φ2)`, unmerged.
pub fn u5_pulses_unmerged(phi: f64) -> Result<Vec<ExchangePulse>, GateError> {
    check_angle(phi)?;
    let (_, phi2, phi3) = scaffold_angles();
    let mut q = u3_pulses(phi2, true, [3, 4, 5])?;
    q.extend(u3_pulses(phi3, false, [1, 2, 3])?);
    let mut out = invert_pulses(&q);
    out.extend(u4_wrapped(phi)?);
    out.extend(q);
    Ok(out)
}

/// CPHASE(φ) on the six-spin register: 25-pulse core, post-correction `U(1,2)(t̄)`.
pub fn cphase_package(phi: f64) -> Result<GateSequencePackage, GateError> {
    let core = merge_adjacent(&u5_pulses_unmerged(phi)?);
    let d = solve_durations(phi)?;
    Ok(GateSequencePackage::new(
        PulseSequence::new(6, Layout::Linear, core)?,
        PulseSequence::empty(6, Layout::Linear),
        PulseSequence::new(6, Layout::Linear, alloc::vec![p(1, 2, d.t_bar)])?,
    )?)
}

/// `Ū5(φ) = P·U4'(φ)·P⁻¹` with `P = U4'(χ1)Ū3(φ1)` (`χ1 = 2π − φ1`).
pub fn u5bar_pulses(phi: f64) -> Result<Vec<ExchangePulse>, GateError> {
    check_angle(phi)?;
    let (phi1, _, _) = scaffold_angles();
    let chi1 = 2.0 * PI - phi1;
    let mut out = u4_wrapped(phi1)?;
    out.extend(u3_pulses(chi1, true, [3, 4, 5])?);
    out.extend(u4_wrapped(phi)?);
    out.extend(u3_pulses(phi1, true, [3, 4, 5])?);
    out.extend(u4_wrapped(chi1)?);
    Ok(out)
}

pub fn u5bar_sequence(phi: f64) -> Result<PulseSequence, GateError> {
    Ok(PulseSequence::new(6, Layout::Linear, u5bar_pulses(phi)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwVariant {
    Lhs,
    Rhs,
}

/// `R = V0⁻¹·U12(1)U34(1)·V0` on spins 2–5.
pub fn r_pulses() -> Vec<ExchangePulse> {
    t0_pulses(1.0, 2)
}

/// The two FW representations on the six-spin register.
///
/// The left form is `R, SWAP(1,2), R, SWAP(1,2), R`; the right form is the
/// 18-pulse fixture and equals the left form up to a trailing `SWAP(4,5)`.
pub fn fw_sequence(variant: FwVariant) -> PulseSequence {
    let pulses = match variant {
        FwVariant::Lhs => {
            let r = r_pulses();
            let mut out = r.clone();
            out.push(p(1, 2, 1.0));
            out.extend_from_slice(&r);
            out.push(p(1, 2, 1.0));
            out.extend(r);
            out
        }
        FwVariant::Rhs => fixtures::fw_rhs(),
    };
    PulseSequence::new(6, Layout::Linear, pulses).expect("fixture is nearest-neighbour")
}

/// Trailing single-qubit SWAP relating the two FW forms.
pub fn fw_residual() -> Vec<ExchangePulse> {
    alloc::vec![p(4, 5, 1.0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    U3,
    U3Bar,
    U4,
    T,
    S,
    U5,
    U5Bar,
    FwLhs,
    FwRhs,
    Crot,
    Cphase,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::U3,
        GateKind::U3Bar,
        GateKind::U4,
        GateKind::T,
        GateKind::S,
        GateKind::U5,
        GateKind::U5Bar,
        GateKind::FwLhs,
        GateKind::FwRhs,
        GateKind::Crot,
        GateKind::Cphase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::U3 => "u3",
            GateKind::U3Bar => "u3bar",
            GateKind::U4 => "u4",
            GateKind::T => "t",
            GateKind::S => "s",
            GateKind::U5 => "u5",
            GateKind::U5Bar => "u5bar",
            GateKind::FwLhs => "fw-lhs",
            GateKind::FwRhs => "fw-rhs",
            GateKind::Crot => "crot",
            GateKind::Cphase => "cphase",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Spins the sequence needs when placed at offset 0.
    pub fn width(self) -> usize {
        match self {
            GateKind::U3 | GateKind::U3Bar => 3,
            GateKind::U4 | GateKind::T | GateKind::S => 4,
            _ => 6,
        }
    }
}

/// A named gate with its parameter (`φ`, or `t` for `T` and `Crot`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedGateSpec {
    pub kind: GateKind,
    pub parameter: f64,
    pub offset: usize,
}

impl NamedGateSpec {
    pub fn new(kind: GateKind, parameter: f64) -> Self {
        Self {
            kind,
            parameter,
            offset: 0,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.kind.width() + self.offset
    }

    /// The full pulse list (corrections included for packages).
    pub fn pulses(&self) -> Result<Vec<ExchangePulse>, GateError> {
        let o = self.offset;
        if self.kind.width() == 6 && o != 0 {
            return Err(GateError::OffsetNotSupported);
        }
        let x = self.parameter;
        Ok(match self.kind {
            GateKind::U3 => u3_pulses(x, false, [o, o + 1, o + 2])?,
            GateKind::U3Bar => u3_pulses(x, true, [o, o + 1, o + 2])?,
            GateKind::U4 => u4_pulses(x, o)?,
            GateKind::T => t_pulses(x, o)?,
            GateKind::S => s_pulses(o),
            GateKind::U5 => u5_pulses_unmerged(x)?,
            GateKind::U5Bar => u5bar_pulses(x)?,
            GateKind::FwLhs => fw_sequence(FwVariant::Lhs).pulses().to_vec(),
            GateKind::FwRhs => fw_sequence(FwVariant::Rhs).pulses().to_vec(),
            GateKind::Crot => controlled_rotation_package(x)?.full_sequence().pulses().to_vec(),
            GateKind::Cphase => cphase_package(x)?.full_sequence().pulses().to_vec(),
        })
    }

    pub fn sequence(&self) -> Result<PulseSequence, GateError> {
        Ok(PulseSequence::new(self.n_spins(), Layout::Linear, self.pulses()?)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDeviation {
    pub name: String,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractReport {
    pub spec: NamedGateSpec,
    pub blocks: Vec<BlockDeviation>,
    pub max_deviation: f64,
    pub passed: bool,
    /// First block above tolerance.
    pub failing_block: Option<String>,
}

fn report(spec: NamedGateSpec, blocks: Vec<BlockDeviation>) -> ContractReport {
    let max_deviation = blocks.iter().map(|b| b.deviation).fold(0.0, f64::max);
    let failing_block = blocks
        .iter()
        .find(|b| !(b.deviation <= CONTRACT_TOL))
        .map(|b| b.name.clone());
    ContractReport {
        spec,
        passed: failing_block.is_none(),
        blocks,
        max_deviation,
        failing_block,
    }
}

fn block(name: &str, deviation: f64) -> BlockDeviation {
    BlockDeviation {
        name: String::from(name),
        deviation,
    }
}

/// Deviation of selected entries of `a` from `target` after a common phase.
fn block_deviations(a: &CMatrix, target: &CMatrix, groups: &[(&str, &[usize])]) -> Vec<BlockDeviation> {
    let ph = best_phase(a, target);
    let t = target.map(|z| z * ph);
    let mut owner = alloc::vec![usize::MAX; a.nrows()];
    for (g, (_, idx)) in groups.iter().enumerate() {
        for &k in *idx {
            owner[k] = g;
        }
    }
    let mut dev = alloc::vec![0.0f64; groups.len()];
    let mut off = 0.0f64;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            let d = (a[(r, c)] - t[(r, c)]).norm();
            if owner[r] == owner[c] && owner[r] != usize::MAX {
                dev[owner[r]] = dev[owner[r]].max(d);
            } else {
                off = off.max(d);
            }
        }
    }
    let mut out: Vec<BlockDeviation> = groups
        .iter()
        .zip(dev)
        .map(|((n, _), d)| block(n, d))
        .collect();
    out.push(block("off-block", off));
    out
}

fn diag_matrix(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

/// Simulates the spec and compares against its closed-form contract.
pub fn verify_contract(spec: &NamedGateSpec) -> Result<ContractReport, GateError> {
    verify_pulses(spec, &spec.pulses()?)
}

/// Checks externally supplied pulses (corrections included) against the
/// contract of `spec`.
pub fn verify_pulses(spec: &NamedGateSpec, pulses: &[ExchangePulse]) -> Result<ContractReport, GateError> {
    let n = spec.n_spins();
    let o = spec.offset;
    let pulses = pulses.to_vec();
    let u = apply_pulses(n, &pulses)?;
    let x = spec.parameter;
    let one = Complex64::new(1.0, 0.0);
    let blocks = match spec.kind {
        GateKind::U3 | GateKind::U3Bar => {
            let d = solve_durations(x)?;
            let trees: Vec<T> = [(0u32, 1u32), (2, 1), (2, 3)]
                .iter()
                .map(|&(a, c)| {
                    if spec.kind == GateKind::U3 {
                        T::node(T::node(T::leaf(o), T::leaf(o + 1), a), T::leaf(o + 2), c)
                    } else {
                        T::node(T::leaf(o), T::node(T::leaf(o + 1), T::leaf(o + 2), a), c)
                    }
                })
                .collect();
            let b = basis_matrix(&trees, 1, n)?;
            let m = b.adjoint() * u.matrix() * &b;
            let target = diag_matrix(&[su2::phase(-PI * d.t_bar), one, su2::phase(-x)]);
            block_deviations(&m, &target, &[("pair spin 0", &[0]), ("pair spin 1", &[1, 2])])
        }
        GateKind::U4 => {
            let d = solve_durations(x)?;
            // ((o o+1)_a (o+2 o+3)_b)_d at the highest weight of each state
            let labels = [(0u32, 0u32, 0u32), (0, 2, 2), (2, 0, 2), (2, 2, 0), (2, 2, 2), (2, 2, 4)];
            let mut vals = Vec::new();
            let mut states = Vec::new();
            for &(a, bb, dd) in &labels {
                let tree = T::node(
                    T::node(T::leaf(o), T::leaf(o + 1), a),
                    T::node(T::leaf(o + 2), T::leaf(o + 3), bb),
                    dd,
                );
                states.push(basis_matrix(&[tree], 0, n)?);
                vals.push(if a == 0 {
                    su2::phase(-PI * d.t_bar)
                } else if bb == 0 || dd == 0 {
                    one
                } else {
                    su2::phase(-x)
                });
            }
            let mut b = CMatrix::zeros(1 << n, states.len());
            for (k, s) in states.iter().enumerate() {
                b.set_column(k, &s.column(0));
            }
            let m = b.adjoint() * u.matrix() * &b;
            block_deviations(
                &m,
                &diag_matrix(&vals),
                &[
                    ("a=0", &[0, 1]),
                    ("a=1 b=0", &[2]),
                    ("a=1 b=1 d=0", &[3]),
                    ("a=1 b=1 d>0", &[4, 5]),
                ],
            )
        }
        GateKind::T | GateKind::S => {
            let c = ea::star_block(&u, n, o)?;
            let lower = if spec.kind == GateKind::T {
                ea::t_gate_closed_form(x)
            } else {
                su2::identity() * Complex64::new(-1.0, 0.0)
            };
            let mut target = CMatrix::identity(4, 4);
            target.view_mut((2, 2), (2, 2)).copy_from(&lower);
            let mut blocks = block_deviations(&c.matrix, &target, &[("d=0", &[0, 1]), ("d=1", &[2, 3])]);
            blocks.push(block("c leakage", c.leakage));
            blocks
        }
        GateKind::U5 | GateKind::U5Bar => {
            let mut blocks = Vec::new();
            for g in [0, 1] {
                let r = ea::extract_gate_unitary(&u, &EncodedBasis::new(g)?);
                blocks.push(block(if g == 0 { "leakage g=0" } else { "leakage g=1" }, r.leakage));
                blocks.push(block(
                    if g == 0 { "off-diagonal g=0" } else { "off-diagonal g=1" },
                    ea::off_diagonal(&r.gate),
                ));
                let inv = r.diagonal_phase_invariant.unwrap_or(f64::NAN);
                blocks.push(block(
                    if g == 0 { "phase invariant g=0" } else { "phase invariant g=1" },
                    ea::angle_gap(inv, -x),
                ));
            }
            blocks
        }
        GateKind::FwLhs | GateKind::FwRhs => {
            let u = if spec.kind == GateKind::FwRhs {
                let mut all = pulses.clone();
                all.extend(fw_residual());
                apply_pulses(n, &all)?
            } else {
                u
            };
            let mut target = CMatrix::identity(4, 4);
            target
                .view_mut((2, 2), (2, 2))
                .copy_from(&su2::dot_sigma(ea::N0));
            encoded_blocks(&u, &target)?
        }
        GateKind::Crot => {
            let mut target = CMatrix::identity(4, 4);
            target
                .view_mut((2, 2), (2, 2))
                .copy_from(&ea::t_gate_closed_form(x));
            encoded_blocks(&u, &target)?
        }
        GateKind::Cphase => {
            let target = diag_matrix(&[one, one, one, su2::phase(-x)]);
            encoded_blocks(&u, &target)?
        }
    };
    Ok(report(*spec, blocks))
}

fn encoded_blocks(u: &crate::spin_system::Unitary, target: &CMatrix) -> Result<Vec<BlockDeviation>, GateError> {
    let mut blocks = Vec::new();
    for g in [0, 1] {
        let r = ea::extract_gate_unitary(u, &EncodedBasis::new(g)?);
        let name = |s: &str| {
            let mut n = String::from(s);
            n.push_str(if g == 0 { " g=0" } else { " g=1" });
            n
        };
        blocks.push(BlockDeviation {
            name: name("leakage"),
            deviation: r.leakage,
        });
        let ph = best_phase(&r.gate, target);
        blocks.push(BlockDeviation {
            name: name("gate"),
            deviation: max_abs_diff(&r.gate, &target.map(|z| z * ph)),
        });
    }
    Ok(blocks)
}
