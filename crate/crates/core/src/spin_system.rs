//! Dense algebra for `n` spin-1/2 particles on the `2^n` product space.
//!
//! Product-state index convention: spin 0 is the most significant bit and a
//! set bit means spin down.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::pulse_sequence::PulseSequence;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest register handled by the dense representation.
pub const MAX_SPINS: usize = 12;

/// Two durations closer than this are treated as equal.
pub const DURATION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SpinError {
    IndexOutOfRange { index: usize, n_spins: usize },
    SameIndex(usize),
    TooManySpins(usize),
    NonFiniteDuration,
    NotABijection,
    DimensionMismatch { left: usize, right: usize },
    NotUnitary(f64),
}

impl fmt::Display for SpinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinError::IndexOutOfRange { index, n_spins } => {
                write!(f, "spin index {index} out of range for {n_spins} spins")
            }
            SpinError::SameIndex(i) => write!(f, "exchange pulse couples spin {i} to itself"),
            SpinError::TooManySpins(n) => write!(f, "{n} spins exceeds the limit of {MAX_SPINS}"),
            SpinError::NonFiniteDuration => write!(f, "pulse duration is not finite"),
            SpinError::NotABijection => write!(f, "permutation is not a bijection"),
            SpinError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            SpinError::NotUnitary(err) => write!(f, "matrix is not unitary (deviation {err:e})"),
        }
    }
}

/// Reduces a duration into `[0, 2)`.
pub fn reduce_duration(t: f64) -> f64 {
    let r = t - 2.0 * libm::floor(t / 2.0);
    if r >= 2.0 {
        0.0
    } else {
        r
    }
}

/// Distance between two durations on the circle of circumference 2.
pub fn duration_distance(a: f64, b: f64) -> f64 {
    let d = reduce_duration(a - b);
    if d > 1.0 {
        2.0 - d
    } else {
        d
    }
}

/// Heisenberg exchange between spins `i < j` for dimensionless time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangePulse {
    i: usize,
    j: usize,
    t: f64,
}

impl ExchangePulse {
    pub fn new(i: usize, j: usize, t: f64) -> Result<Self, SpinError> {
        if i == j {
            return Err(SpinError::SameIndex(i));
        }
        if !t.is_finite() {
            return Err(SpinError::NonFiniteDuration);
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        Ok(Self {
            i,
            j,
            t: reduce_duration(t),
        })
    }

    /// Crate-internal constructor for index pairs known to be distinct.
    pub(crate) fn raw(i: usize, j: usize, t: f64) -> Self {
        debug_assert!(i != j);
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        Self {
            i,
            j,
            t: reduce_duration(t),
        }
    }

    pub fn swap(i: usize, j: usize) -> Result<Self, SpinError> {
        Self::new(i, j, 1.0)
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn touches(&self, k: usize) -> bool {
        self.i == k || self.j == k
    }

    pub fn same_pair(&self, other: &Self) -> bool {
        self.pair() == other.pair()
    }

    /// Duration 1: a SWAP up to the phase −1.
    pub fn is_swap(&self) -> bool {
        (self.t - 1.0).abs() < DURATION_EPS
    }

    pub fn is_identity(&self) -> bool {
        duration_distance(self.t, 0.0) < DURATION_EPS
    }

    /// The pulse of duration `2 − t`.
    pub fn inverse(&self) -> Self {
        Self {
            t: reduce_duration(2.0 - self.t),
            ..*self
        }
    }

    pub fn with_duration(&self, t: f64) -> Self {
        Self {
            t: reduce_duration(t),
            ..*self
        }
    }

    /// Relabels both indices through `map` (`k ↦ map[k]`).
    pub fn relabel(&self, map: &[usize]) -> Self {
        Self::raw(map[self.i], map[self.j], self.t)
    }

    /// Conjugates by the transposition `(a b)`.
    pub fn transposed(&self, a: usize, b: usize) -> Self {
        let tr = |k: usize| {
            if k == a {
                b
            } else if k == b {
                a
            } else {
                k
            }
        };
        Self::raw(tr(self.i), tr(self.j), self.t)
    }

    /// Identical pair and durations equal within [`DURATION_EPS`].
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.same_pair(other) && duration_distance(self.t, other.t) < DURATION_EPS
    }

    pub fn check(&self, n_spins: usize) -> Result<(), SpinError> {
        if self.j >= n_spins {
            return Err(SpinError::IndexOutOfRange {
                index: self.j,
                n_spins,
            });
        }
        Ok(())
    }
}

/// Reversed sequence with every duration replaced by `2 − t`.
pub fn invert_pulses(pulses: &[ExchangePulse]) -> Vec<ExchangePulse> {
    pulses.iter().rev().map(ExchangePulse::inverse).collect()
}

/// Dense unitary on the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: CMatrix,
}

impl Unitary {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    /// Accepts `matrix` if it is square and unitary within 1e-10.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self, SpinError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(SpinError::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        let err = unitarity_error(&matrix);
        if err > 1e-10 {
            return Err(SpinError::NotUnitary(err));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `next · self`, i.e. `self` acts first.
    pub fn then(&self, next: &Unitary) -> Result<Self, SpinError> {
        same_dim(self.dim(), next.dim())?;
        Ok(Self {
            matrix: &next.matrix * &self.matrix,
        })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector, SpinError> {
        same_dim(self.dim(), state.amplitudes.len())?;
        Ok(StateVector {
            n_spins: state.n_spins,
            amplitudes: &self.matrix * &state.amplitudes,
        })
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.matrix)
    }
}

/// Normalized (or not yet normalized) product-space amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_spins: usize,
    amplitudes: CVector,
}

impl StateVector {
    pub fn zero(n_spins: usize) -> Result<Self, SpinError> {
        check_register(n_spins)?;
        Ok(Self {
            n_spins,
            amplitudes: CVector::zeros(1 << n_spins),
        })
    }

    /// Product state with the given bit pattern (bit set = spin down).
    pub fn basis(n_spins: usize, index: usize) -> Result<Self, SpinError> {
        let mut s = Self::zero(n_spins)?;
        if index >= s.amplitudes.len() {
            return Err(SpinError::IndexOutOfRange {
                index,
                n_spins: s.amplitudes.len(),
            });
        }
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(n_spins: usize, amplitudes: CVector) -> Result<Self, SpinError> {
        check_register(n_spins)?;
        same_dim(1 << n_spins, amplitudes.len())?;
        Ok(Self {
            n_spins,
            amplitudes,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

fn check_register(n_spins: usize) -> Result<(), SpinError> {
    if n_spins > MAX_SPINS {
        Err(SpinError::TooManySpins(n_spins))
    } else {
        Ok(())
    }
}

fn same_dim(left: usize, right: usize) -> Result<(), SpinError> {
    if left == right {
        Ok(())
    } else {
        Err(SpinError::DimensionMismatch { left, right })
    }
}

fn unitarity_error(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    let id = CMatrix::identity(m.nrows(), m.ncols());
    max_abs_diff(&prod, &id)
}

/// Largest entrywise modulus of `a − b` (infinite on shape mismatch).
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Product-state index after exchanging the states of spins `i` and `j`.
fn swapped_index(n: usize, index: usize, i: usize, j: usize) -> usize {
    let bi = 1 << (n - 1 - i);
    let bj = 1 << (n - 1 - j);
    let si = index & bi != 0;
    let sj = index & bj != 0;
    if si == sj {
        index
    } else {
        index ^ bi ^ bj
    }
}

/// Replaces `m` by `U_ij(t)·m` using `U = a·1 − b·P_ij`.
pub fn left_multiply_pulse(m: &mut CMatrix, n: usize, pulse: &ExchangePulse) {
    let e = Complex64::from_polar(1.0, -core::f64::consts::PI * pulse.t);
    let a = (Complex64::new(1.0, 0.0) + e) * 0.5;
    let b = (Complex64::new(1.0, 0.0) - e) * 0.5;
    let dim = m.nrows();
    for r in 0..dim {
        let s = swapped_index(n, r, pulse.i, pulse.j);
        if s < r {
            continue;
        }
        if s == r {
            // P fixes the row: a − b = e.
            for c in 0..m.ncols() {
                m[(r, c)] *= e;
            }
        } else {
            for c in 0..m.ncols() {
                let x = m[(r, c)];
                let y = m[(s, c)];
                m[(r, c)] = a * x - b * y;
                m[(s, c)] = a * y - b * x;
            }
        }
    }
}

/// Closed-form exchange unitary `((1+e^{−iπt})/2)·1 − ((1−e^{−iπt})/2)·P_ij`.
pub fn exchange_unitary(n: usize, pulse: &ExchangePulse) -> Result<Unitary, SpinError> {
    check_register(n)?;
    pulse.check(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::identity(dim, dim);
    left_multiply_pulse(&mut m, n, pulse);
    Ok(Unitary::from_matrix_unchecked(m))
}

/// Operator sending spin `k`'s state to position `perm[k]`.
pub fn permutation_operator(n: usize, perm: &[usize]) -> Result<Unitary, SpinError> {
    check_register(n)?;
    if !is_permutation(perm, n) {
        return Err(SpinError::NotABijection);
    }
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for src in 0..dim {
        let mut dst = 0usize;
        for (k, &target) in perm.iter().enumerate() {
            if src & (1 << (n - 1 - k)) != 0 {
                dst |= 1 << (n - 1 - target);
            }
        }
        m[(dst, src)] = Complex64::new(1.0, 0.0);
    }
    Ok(Unitary::from_matrix_unchecked(m))
}

pub fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = alloc::vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

/// `1 − |tr(U†V)|/d`; zero exactly when `U = e^{iθ}V`.
pub fn phase_distance(u: &Unitary, v: &Unitary) -> Result<f64, SpinError> {
    same_dim(u.dim(), v.dim())?;
    Ok(matrix_phase_distance(u.matrix(), v.matrix()))
}

pub fn matrix_phase_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let d = u.nrows() as f64;
    let tr = u.adjoint() * v;
    let overlap = tr.trace().norm() / d;
    (1.0 - overlap).max(0.0)
}

/// Phase `θ` maximizing the overlap of `e^{iθ}·b` with `a`.
pub fn best_phase(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let s: Complex64 = b.iter().zip(a.iter()).map(|(y, x)| y.conj() * x).sum();
    if s.norm() < 1e-300 {
        Complex64::new(1.0, 0.0)
    } else {
        s / s.norm()
    }
}

/// Entrywise deviation of `a` from `b` after removing the best global phase.
pub fn aligned_deviation(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let ph = best_phase(a, b);
    max_abs_diff(a, &b.map(|z| z * ph))
}

/// Time-ordered product of pulses on `n` spins.
pub fn apply_pulses(n: usize, pulses: &[ExchangePulse]) -> Result<Unitary, SpinError> {
    check_register(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::identity(dim, dim);
    for p in pulses {
        p.check(n)?;
        left_multiply_pulse(&mut m, n, p);
    }
    Ok(Unitary::from_matrix_unchecked(m))
}

/// Unitary of a sequence; the first pulse acts first.
pub fn apply_sequence(seq: &PulseSequence) -> Result<Unitary, SpinError> {
    apply_pulses(seq.n_spins(), seq.pulses())
}

/// Propagates a single state through the pulses (cheaper than the full unitary).
pub fn evolve_state(state: &StateVector, pulses: &[ExchangePulse]) -> Result<StateVector, SpinError> {
    let n = state.n_spins;
    let mut m = CMatrix::from_column_slice(state.amplitudes.len(), 1, state.amplitudes.as_slice());
    for p in pulses {
        p.check(n)?;
        left_multiply_pulse(&mut m, n, p);
    }
    Ok(StateVector {
        n_spins: n,
        amplitudes: CVector::from_column_slice(m.as_slice()),
    })
}

/// Total `S_z` (diagonal, in units of ħ).
pub fn total_sz(n: usize) -> Result<CMatrix, SpinError> {
    check_register(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        let down = x.count_ones() as f64;
        m[(x, x)] = Complex64::new(n as f64 / 2.0 - down, 0.0);
    }
    Ok(m)
}

/// Total `S²` as `3n/4 + Σ_{i<j} (P_ij − 1/2)`, from `s_i·s_j = (2P_ij − 1)/4`.
pub fn total_spin_squared(n: usize) -> Result<CMatrix, SpinError> {
    check_register(n)?;
    let dim = 1 << n;
    let diag = 0.75 * n as f64 - 0.5 * (n * (n - 1) / 2) as f64;
    let mut m = CMatrix::identity(dim, dim) * Complex64::new(diag, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            for x in 0..dim {
                let y = swapped_index(n, x, i, j);
                m[(y, x)] += Complex64::new(1.0, 0.0);
            }
        }
    }
    Ok(m)
}
