//! Encoded two-qubit gates, leakage, local invariants and the pseudospin oracles.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::coupling_basis::{basis_matrix, coupled_state, CouplingError, CouplingTree as T};
use crate::gate_library::{self as gl, GateError};
use crate::pulse_sequence::PulseSequence;
use crate::spin_system::{
    aligned_deviation, apply_pulses, apply_sequence, max_abs_diff, CMatrix, ExchangePulse, SpinError, Unitary,
};
use crate::su2::{self, Vec3};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// `n̂0`: the FW `𝕄` axis.
pub const N0: Vec3 = [0.0, SQRT3_2, -0.5];
/// `n̂1`: axis of the `t`-dependent factor of the `T` operation.
pub const N1: Vec3 = [0.433_012_701_892_219_3, -SQRT3_2, 0.25];
/// `n̂2`: pseudospin axis of `U4` in the `f = 1/2` sector.
pub const N2: Vec3 = [0.942_809_041_582_063_4, 0.0, -1.0 / 3.0];
/// `n̂3`: pseudospin axis of `U3` in the `f = 1/2` sector.
pub const N3: Vec3 = [-0.628_539_361_054_708_9, 0.0, -7.0 / 9.0];
/// `f̂0`: basis change performed by `V0`.
pub const F0_AXIS: Vec3 = [0.0, -SQRT3_2, -0.5];
/// `f̂4`, equal to `n̂0`.
pub const F4_AXIS: Vec3 = N0;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    NotUnitary(f64),
    DomainError(f64),
    NotTwoByTwo,
    Coupling(CouplingError),
    Simulation(SpinError),
    Gate(GateError),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::NotUnitary(e) => write!(f, "matrix is not unitary (deviation {e:e})"),
            AnalysisError::DomainError(x) => write!(f, "argument {x} outside the function's domain"),
            AnalysisError::NotTwoByTwo => write!(f, "expected a 2×2 matrix"),
            AnalysisError::Coupling(e) => write!(f, "{e}"),
            AnalysisError::Simulation(e) => write!(f, "{e}"),
            AnalysisError::Gate(e) => write!(f, "{e}"),
        }
    }
}

impl From<CouplingError> for AnalysisError {
    fn from(e: CouplingError) -> Self {
        AnalysisError::Coupling(e)
    }
}

impl From<SpinError> for AnalysisError {
    fn from(e: SpinError) -> Self {
        AnalysisError::Simulation(e)
    }
}

impl From<GateError> for AnalysisError {
    fn from(e: GateError) -> Self {
        AnalysisError::Gate(e)
    }
}

impl From<AnalysisError> for GateError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Coupling(c) => GateError::Coupling(c),
            AnalysisError::Simulation(s) => GateError::Simulation(s),
            AnalysisError::Gate(g) => g,
            _ => GateError::Fixture("analysis failed"),
        }
    }
}

/// Computational basis `((•(••)_a)_{1/2}(•(••)_b)_{1/2})_g` on six spins.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedBasis {
    pub sector: u32,
    /// Doubled total `S_z`; the highest weight `2g`.
    pub m2: i32,
    /// Columns ordered `|00⟩, |01⟩, |10⟩, |11⟩` (qubit A first).
    pub states: CMatrix,
}

impl EncodedBasis {
    pub fn new(sector: u32) -> Result<Self, CouplingError> {
        Self::with_projection(sector, 2 * sector as i32)
    }

    pub fn with_projection(sector: u32, m2: i32) -> Result<Self, CouplingError> {
        let trees: Vec<T> = [(0u32, 0u32), (0, 2), (2, 0), (2, 2)]
            .iter()
            .map(|&(a, b)| T::node(T::star(0, 1, 2, a), T::star(3, 4, 5, b), 2 * sector))
            .collect();
        Ok(Self {
            sector,
            m2,
            states: basis_matrix(&trees, m2, 6)?,
        })
    }
}

/// Classification of an extracted gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStructure {
    /// `diag(1, 𝕄)` up to global phase.
    ControlledM,
    Diagonal,
    General,
}

impl BlockStructure {
    pub fn name(self) -> &'static str {
        match self {
            BlockStructure::ControlledM => "diag(1,M)",
            BlockStructure::Diagonal => "diagonal",
            BlockStructure::General => "general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Makhlin {
    pub g1: Complex64,
    pub g2: f64,
}

impl Makhlin {
    pub fn identity() -> Self {
        Self {
            g1: Complex64::new(1.0, 0.0),
            g2: 3.0,
        }
    }

    pub fn cnot() -> Self {
        Self {
            g1: Complex64::new(0.0, 0.0),
            g2: 1.0,
        }
    }

    pub fn distance(&self, other: &Makhlin) -> f64 {
        (self.g1 - other.g1).norm().max((self.g2 - other.g2).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedGateReport {
    pub gate: CMatrix,
    pub leakage: f64,
    pub makhlin: Option<Makhlin>,
    /// `α00 − α01 − α10 + α11` in `(−π, π]`, when the gate is diagonal.
    pub diagonal_phase_invariant: Option<f64>,
    pub block_structure: BlockStructure,
}

/// Leakage threshold below which invariants are computed.
pub const INVARIANT_LEAKAGE: f64 = 1e-8;
/// Tolerance for structural classification.
pub const STRUCTURE_TOL: f64 = 1e-9;

/// `max_l ‖U b_l − Σ_k G_kl b_k‖`: equal to `max_l √(1 − Σ_k |G_kl|²)` for
/// unitary `U`, without the square-root amplification of round-off.
pub fn projected_leakage(u: &CMatrix, basis: &CMatrix, gate: &CMatrix) -> f64 {
    let image = u * basis;
    let inside = basis * gate;
    (0..basis.ncols())
        .map(|l| (image.column(l) - inside.column(l)).norm())
        .fold(0.0, f64::max)
}

/// `max_l √(1 − Σ_k |G_kl|²)` from the projected block alone.
pub fn column_leakage(g: &CMatrix) -> f64 {
    (0..g.ncols())
        .map(|l| libm::sqrt((1.0 - g.column(l).norm_squared()).max(0.0)))
        .fold(0.0, f64::max)
}

pub fn off_diagonal(m: &CMatrix) -> f64 {
    let mut out = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c {
                out = out.max(m[(r, c)].norm());
            }
        }
    }
    out
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x - 2.0 * PI * libm::floor((x + PI) / (2.0 * PI));
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Distance between two angles modulo `2π`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    if !a.is_finite() || !b.is_finite() {
        return f64::INFINITY;
    }
    wrap_angle(a - b).abs()
}

fn classify(g: &CMatrix) -> BlockStructure {
    let g00 = g[(0, 0)];
    if g00.norm() > 0.5 {
        let ph = g00 / g00.norm();
        let n = g.map(|z| z / ph);
        let mut up = CMatrix::identity(2, 2);
        up.copy_from(&n.view((0, 0), (2, 2)));
        let cross = n.view((0, 2), (2, 2)).iter().chain(n.view((2, 0), (2, 2)).iter()).fold(0.0f64, |m, z| m.max(z.norm()));
        if max_abs_diff(&up, &CMatrix::identity(2, 2)) < STRUCTURE_TOL && cross < STRUCTURE_TOL {
            return BlockStructure::ControlledM;
        }
    }
    if off_diagonal(g) < STRUCTURE_TOL {
        BlockStructure::Diagonal
    } else {
        BlockStructure::General
    }
}

/// Projects a register unitary onto one encoded sector.
pub fn extract_gate_unitary(u: &Unitary, basis: &EncodedBasis) -> EncodedGateReport {
    let gate = basis.states.adjoint() * u.matrix() * &basis.states;
    let leakage = projected_leakage(u.matrix(), &basis.states, &gate);
    analyze_with_leakage(gate, leakage)
}

/// Analysis of a 4×4 block already projected onto the encoded basis.
pub fn analyze_gate(gate: CMatrix) -> EncodedGateReport {
    let leakage = column_leakage(&gate);
    analyze_with_leakage(gate, leakage)
}

fn analyze_with_leakage(gate: CMatrix, leakage: f64) -> EncodedGateReport {
    let block_structure = classify(&gate);
    let (makhlin, invariant) = if leakage < INVARIANT_LEAKAGE {
        let mk = makhlin_invariants(&gate).ok();
        let inv = if off_diagonal(&gate) < STRUCTURE_TOL {
            let a = |k: usize| gate[(k, k)].arg();
            Some(wrap_angle(a(0) - a(1) - a(2) + a(3)))
        } else {
            None
        };
        (mk, inv)
    } else {
        (None, None)
    };
    EncodedGateReport {
        gate,
        leakage,
        makhlin,
        diagonal_phase_invariant: invariant,
        block_structure,
    }
}

/// Extracts the encoded gate of a six-spin sequence in sector `g`.
pub fn extract_gate(seq: &PulseSequence, sector: u32) -> Result<EncodedGateReport, AnalysisError> {
    if seq.n_spins() != 6 {
        return Err(AnalysisError::Simulation(SpinError::DimensionMismatch {
            left: 6,
            right: seq.n_spins(),
        }));
    }
    let u = apply_sequence(seq)?;
    Ok(extract_gate_unitary(&u, &EncodedBasis::new(sector)?))
}

fn magic_basis() -> CMatrix {
    let r = 1.0 / libm::sqrt(2.0);
    let (o, z, i) = (Complex64::new(r, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, r));
    CMatrix::from_row_slice(4, 4, &[o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i])
}

/// Makhlin invariants `G1 = tr²m/(16 det U)`, `G2 = (tr²m − tr m²)/(4 det U)`,
/// `m = U_Bᵀ U_B`, `U_B = Q† U Q`.
pub fn makhlin_invariants(u: &CMatrix) -> Result<Makhlin, AnalysisError> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(AnalysisError::NotUnitary(f64::INFINITY));
    }
    let err = max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(4, 4));
    if err > 1e-8 {
        return Err(AnalysisError::NotUnitary(err));
    }
    let q = magic_basis();
    let ub = q.adjoint() * u * &q;
    let m = ub.transpose() * &ub;
    let det = u.determinant();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    let g1 = tr * tr / (det * 16.0);
    let g2 = (tr * tr - tr2) / (det * 4.0);
    Ok(Makhlin { g1, g2: g2.re })
}

/// `M = e^{iξ} e^{iφ n̂·σ/2}` decomposition of a 2×2 unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAngle {
    /// Angle in `[0, π]` (branch with `cos(φ/2) ≥ 0`).
    pub phi: f64,
    /// Rotation axis; `None` when `M ∝ 1`.
    pub axis: Option<Vec3>,
    pub xi: f64,
    /// Eigenvalue-ratio phase `arg(λ1/λ2)` in `[0, 2π)`.
    pub eigenphase_difference: f64,
}

fn check_2x2(m: &CMatrix) -> Result<(), AnalysisError> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(AnalysisError::NotTwoByTwo);
    }
    let err = max_abs_diff(&(m.adjoint() * m), &su2::identity());
    if err > 1e-8 {
        return Err(AnalysisError::NotUnitary(err));
    }
    Ok(())
}

/// `(a0, a)` with `G = a0·1 + i a·σ`, real parts only.
fn su2_components(g: &CMatrix) -> (f64, Vec3) {
    let a0 = (g[(0, 0)] + g[(1, 1)]).re / 2.0;
    let a = [
        (g[(0, 1)] + g[(1, 0)]).im / 2.0,
        (g[(0, 1)] - g[(1, 0)]).re / 2.0,
        (g[(0, 0)] - g[(1, 1)]).im / 2.0,
    ];
    (a0, a)
}

pub fn rotation_angle(m: &CMatrix) -> Result<RotationAngle, AnalysisError> {
    check_2x2(m)?;
    let det = m.determinant();
    let mut xi = det.arg() / 2.0;
    let mut g = m * su2::phase(-xi);
    if g.trace().re < 0.0 {
        xi = wrap_angle(xi + PI);
        g = -g;
    }
    let (a0, a) = su2_components(&g);
    let s = su2::norm(a);
    let phi = 2.0 * libm::atan2(s, a0);
    let axis = if s < 1e-12 { None } else { Some(su2::scale(a, 1.0 / s)) };
    Ok(RotationAngle {
        phi,
        axis,
        xi,
        eigenphase_difference: phi,
    })
}

/// Rotation angle in `[0, 2π]` for a given reference phase `ξ`: the `φ` of
/// `e^{−iξ}M = cos(φ/2) + i sin(φ/2) n̂·σ` with `sin(φ/2) ≥ 0`.
pub fn rotation_angle_with_phase(m: &CMatrix, xi: f64) -> Result<f64, AnalysisError> {
    check_2x2(m)?;
    let (a0, a) = su2_components(&(m * su2::phase(-xi)));
    Ok(2.0 * libm::atan2(su2::norm(a), a0))
}

/// `φ(t) = 2·arccos((3cos(πt/2) + 5cos(3πt/2))/8)`: the rotation angle of
/// the `T` operation's `𝕄(t)` with `ξ = −πt/2`.
pub fn phi_of_t(t: f64) -> Result<f64, AnalysisError> {
    if !t.is_finite() || t < 0.0 || t > gl::crot_t_max() + 1e-12 {
        return Err(AnalysisError::DomainError(t));
    }
    // cos(φ/2) = x with 1 ∓ x in half-angle form, so φ is accurate near 0 and 2π
    let x = (3.0 * libm::cos(PI * t / 2.0) + 5.0 * libm::cos(3.0 * PI * t / 2.0)) / 8.0;
    let sq = |v: f64| v * v;
    let one_minus = (6.0 * sq(libm::sin(PI * t / 4.0)) + 10.0 * sq(libm::sin(3.0 * PI * t / 4.0))) / 8.0;
    let one_plus = (6.0 * sq(libm::cos(PI * t / 4.0)) + 10.0 * sq(libm::cos(3.0 * PI * t / 4.0))) / 8.0;
    Ok(2.0 * libm::atan2(libm::sqrt(one_minus * one_plus), x))
}

/// `𝕄(t) = e^{−iπt/2} e^{iπ(2−t)ẑ·σ} e^{−iπt n̂1·σ/2}`.
pub fn t_gate_closed_form(t: f64) -> CMatrix {
    su2::exp_i_sigma(PI * (2.0 - t), [0.0, 0.0, 1.0]) * su2::exp_i_sigma(-PI * t / 2.0, N1) * su2::phase(-PI * t / 2.0)
}

/// Four-spin `(•★)_d` block of a register unitary, with `★ = (•(••)_b)_{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarBlock {
    /// Rows/columns `(d,b) = (0,0), (0,1), (1,0), (1,1)`.
    pub matrix: CMatrix,
    /// Amplitude leaving the `c = 1/2` states.
    pub leakage: f64,
}

pub fn star_block(u: &Unitary, n_spins: usize, offset: usize) -> Result<StarBlock, CouplingError> {
    let o = offset;
    let trees: Vec<T> = [(0u32, 0u32), (0, 2), (2, 0), (2, 2)]
        .iter()
        .map(|&(d, b)| T::node(T::leaf(o), T::star(o + 1, o + 2, o + 3, b), d))
        .collect();
    let basis = basis_matrix(&trees, 0, n_spins)?;
    let matrix = basis.adjoint() * u.matrix() * &basis;
    Ok(StarBlock {
        leakage: projected_leakage(u.matrix(), &basis, &matrix),
        matrix,
    })
}

/// Pseudospin operators with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudospinKind {
    U4F12,
    U4F32,
    U3Bar,
    U3,
}

impl PseudospinKind {
    pub const ALL: [PseudospinKind; 4] = [
        PseudospinKind::U4F12,
        PseudospinKind::U4F32,
        PseudospinKind::U3Bar,
        PseudospinKind::U3,
    ];
}

/// Closed-form pseudospin matrix in the `↑_f, ↓_f` (`c = 1/2, 3/2`) basis.
pub fn pseudospin_oracle(kind: PseudospinKind, phi: f64) -> CMatrix {
    let one = Complex64::new(1.0, 0.0);
    match kind {
        PseudospinKind::U4F12 => su2::exp_i_sigma(phi / 2.0, N2) * su2::phase(-phi / 2.0),
        PseudospinKind::U4F32 => su2::identity() * su2::phase(-phi),
        PseudospinKind::U3Bar => su2::diag(one, su2::phase(-phi)),
        PseudospinKind::U3 => su2::exp_i_sigma(phi / 2.0, N3) * su2::phase(-phi / 2.0),
    }
}

/// Register sequence whose pseudospin action the oracle describes.
pub fn pseudospin_pulses(kind: PseudospinKind, phi: f64) -> Result<Vec<ExchangePulse>, GateError> {
    match kind {
        PseudospinKind::U4F12 | PseudospinKind::U4F32 => {
            let w = [ExchangePulse::raw(3, 4, 1.0), ExchangePulse::raw(4, 5, 1.0)];
            let mut out = w.to_vec();
            out.extend(gl::u4_pulses(phi, 1)?);
            out.extend(crate::spin_system::invert_pulses(&w));
            Ok(out)
        }
        PseudospinKind::U3Bar => gl::u3_pulses(phi, true, [3, 4, 5]),
        PseudospinKind::U3 => gl::u3_pulses(phi, false, [1, 2, 3]),
    }
}

/// `↑_f, ↓_f = ((••)_1(•(••)_1)_c)_f` on spins 1–5, `c = 1/2, 3/2`.
pub fn pseudospin_basis(f2: u32) -> Result<CMatrix, CouplingError> {
    let trees: Vec<T> = [1u32, 3]
        .iter()
        .map(|&c| T::node(T::triangle(1, 2), T::node(T::leaf(3), T::triangle(4, 5), c), f2))
        .collect();
    basis_matrix(&trees, f2 as i32, 6)
}

/// Simulated action of `u` in the `f = f2/2` pseudospin sector.
pub fn pseudospin_projection(u: &Unitary, f2: u32) -> Result<CMatrix, CouplingError> {
    let b = pseudospin_basis(f2)?;
    Ok(b.adjoint() * u.matrix() * &b)
}

/// Deviation between oracle and projected simulation under one common phase.
///
/// `U4` kinds are compared jointly over both sectors and `Ū3` over both
/// sectors; `U3` is compared in `f = 1/2`, the sector its closed form covers.
pub fn pseudospin_check(kind: PseudospinKind, phi: f64) -> Result<f64, AnalysisError> {
    let u = apply_pulses(6, &pseudospin_pulses(kind, phi)?)?;
    let (sectors, oracles): (Vec<u32>, Vec<CMatrix>) = match kind {
        PseudospinKind::U4F12 | PseudospinKind::U4F32 => (
            alloc::vec![1, 3],
            alloc::vec![
                pseudospin_oracle(PseudospinKind::U4F12, phi),
                pseudospin_oracle(PseudospinKind::U4F32, phi)
            ],
        ),
        PseudospinKind::U3Bar => (
            alloc::vec![1, 3],
            alloc::vec![pseudospin_oracle(kind, phi), pseudospin_oracle(kind, phi)],
        ),
        PseudospinKind::U3 => (alloc::vec![1], alloc::vec![pseudospin_oracle(kind, phi)]),
    };
    let k = sectors.len();
    let mut sim = CMatrix::zeros(2 * k, 2 * k);
    let mut orc = CMatrix::zeros(2 * k, 2 * k);
    for (s, (&f2, o)) in sectors.iter().zip(&oracles).enumerate() {
        sim.view_mut((2 * s, 2 * s), (2, 2))
            .copy_from(&pseudospin_projection(&u, f2)?);
        orc.view_mut((2 * s, 2 * s), (2, 2)).copy_from(o);
    }
    Ok(aligned_deviation(&sim, &orc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeAngles {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

/// Scaffold angles from the axis components of `n̂2` and `n̂3`.
pub fn cone_angles() -> ConeAngles {
    let (n2x, n2z) = (N2[0], N2[2]);
    let (n3x, n3z) = (N3[0], N3[2]);
    ConeAngles {
        phi1: libm::acos(n2z / (n2z - 1.0)),
        phi2: libm::acos(-(n3z * (1.0 + n2z)) / (n2x * n3x)),
        phi3: libm::acos(-(n2z + n3z * n3z) / (n3x * n3x)),
    }
}

/// Rodrigues rotation of `v` about unit `axis` by `angle`.
pub fn rotate(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    let k = axis;
    let kxv = su2::cross(k, v);
    let kdv = su2::dot(k, v);
    [
        v[0] * c + kxv[0] * s + k[0] * kdv * (1.0 - c),
        v[1] * c + kxv[1] * s + k[1] * kdv * (1.0 - c),
        v[2] * c + kxv[2] * s + k[2] * kdv * (1.0 - c),
    ]
}

/// `n̂2` rotated about `ẑ` by `φ2`, then about `n̂3` by `φ3`.
pub fn cone_composite() -> Vec3 {
    let a = cone_angles();
    rotate(rotate(N2, [0.0, 0.0, 1.0], a.phi2), N3, a.phi3)
}

/// POWT `U23(1)U12(1)` on three spins, projected as
/// `⟨((••)_1•)_c | U | (•(••)_1)_c⟩` for `c = 1/2, 3/2` (full 2×2 overlap).
pub fn powt_factor() -> Result<CMatrix, AnalysisError> {
    let u = apply_pulses(3, &[ExchangePulse::raw(0, 1, 1.0), ExchangePulse::raw(1, 2, 1.0)])?;
    let mut out = CMatrix::zeros(2, 2);
    for (r, &c_out) in [1u32, 3].iter().enumerate() {
        for (col, &c_in) in [1u32, 3].iter().enumerate() {
            let bra = coupled_state(&T::node(T::triangle(0, 1), T::leaf(2), c_out), 1, 3)?;
            let ket = coupled_state(&T::node(T::leaf(0), T::triangle(1, 2), c_in), 1, 3)?;
            out[(r, col)] = bra.inner(&u.apply(&ket)?);
        }
    }
    Ok(out)
}

/// `F0` from simulating `V0`, normalized so `F0[v1, b=0]` is real and negative.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Result {
    pub matrix: CMatrix,
    /// Phase removed from the raw overlaps.
    pub stripped_phase: f64,
}

pub fn compute_f0() -> Result<F0Result, AnalysisError> {
    let n = 4;
    let u = apply_pulses(n, &gl::v0_pulses(0))?;
    let pair = |a: u32, b: u32| T::node(T::node(T::leaf(0), T::leaf(1), a), T::node(T::leaf(2), T::leaf(3), b), 2);
    let v1 = coupled_state(&pair(2, 2), 2, n)?;
    let s6 = libm::sqrt(6.0);
    let alpha = Complex64::new(-2.0 / s6, -1.0 / s6);
    let beta = Complex64::new(0.0, 1.0 / s6);
    let v2 = coupled_state(&pair(2, 0), 2, n)?.amplitudes() * alpha + coupled_state(&pair(0, 2), 2, n)?.amplitudes() * beta;
    let mut raw = CMatrix::zeros(2, 2);
    for (col, b) in [0u32, 2].iter().enumerate() {
        let ket = coupled_state(&T::node(T::leaf(0), T::node(T::leaf(1), T::node(T::leaf(2), T::leaf(3), *b), 1), 2), 2, n)?;
        let out = u.apply(&ket)?;
        raw[(0, col)] = v1.amplitudes().dotc(out.amplitudes());
        raw[(1, col)] = v2.dotc(out.amplitudes());
    }
    // rotate raw[0,0] onto the negative real axis
    let stripped_phase = wrap_angle(raw[(0, 0)].arg() - PI);
    Ok(F0Result {
        matrix: raw * su2::phase(-stripped_phase),
        stripped_phase,
    })
}
