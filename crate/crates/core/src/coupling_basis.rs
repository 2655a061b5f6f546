//! Total-spin coupled states built by sequential Clebsch–Gordan coupling.
//!
//! Spin quantum numbers are stored doubled (`spin2 = 2j`, `m2 = 2m`) so that
//! half-integers stay exact.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::spin_system::{CMatrix, CVector, StateVector, MAX_SPINS};
use crate::su2;

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingError {
    DuplicateLeaf(usize),
    LeafOutOfRange { index: usize, n_spins: usize },
    Triangle { left2: u32, right2: u32, total2: u32 },
    InvalidProjection { spin2: u32, m2: i32 },
    EmptyBasis,
    SpanMismatch(f64),
}

impl fmt::Display for CouplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingError::DuplicateLeaf(i) => write!(f, "spin {i} appears twice in the tree"),
            CouplingError::LeafOutOfRange { index, n_spins } => {
                write!(f, "leaf {index} out of range for {n_spins} spins")
            }
            CouplingError::Triangle {
                left2,
                right2,
                total2,
            } => write!(
                f,
                "spins {}/2 and {}/2 cannot couple to {}/2",
                left2, right2, total2
            ),
            CouplingError::InvalidProjection { spin2, m2 } => {
                write!(f, "projection {m2}/2 invalid for spin {spin2}/2")
            }
            CouplingError::EmptyBasis => write!(f, "empty basis"),
            CouplingError::SpanMismatch(e) => {
                write!(f, "bases do not span the same subspace (deviation {e:e})")
            }
        }
    }
}

const FACTORIALS: [f64; 26] = {
    let mut t = [1.0f64; 26];
    let mut k = 1;
    while k < 26 {
        t[k] = t[k - 1] * k as f64;
        k += 1;
    }
    t
};

fn fact(n: i32) -> f64 {
    FACTORIALS[n as usize]
}

fn triangle(a2: u32, b2: u32, c2: u32) -> bool {
    let (a, b, c) = (a2 as i64, b2 as i64, c2 as i64);
    c <= a + b && c >= (a - b).abs() && (a + b + c) % 2 == 0
}

/// Condon–Shortley Clebsch–Gordan coefficient with doubled arguments.
///
/// Returns 0 for any combination that violates a selection rule.
pub fn cg_doubled(j1: u32, m1: i32, j2: u32, m2: i32, j: u32, m: i32) -> f64 {
    let valid_m = |jj: u32, mm: i32| mm.abs() <= jj as i32 && (jj as i32 + mm) % 2 == 0;
    if !valid_m(j1, m1) || !valid_m(j2, m2) || !valid_m(j, m) || m1 + m2 != m {
        return 0.0;
    }
    if !triangle(j1, j2, j) {
        return 0.0;
    }
    if j1 + j2 + j > 2 * 24 {
        return f64::NAN;
    }
    let (j1, j2, j) = (j1 as i32, j2 as i32, j as i32);
    // Racah's closed form; every argument below is an even number halved.
    let h = |x: i32| x / 2;
    let pre = ((j + 1) as f64 * fact(h(j + j1 - j2)) * fact(h(j - j1 + j2)) * fact(h(j1 + j2 - j))
        / fact(h(j1 + j2 + j) + 1))
        * fact(h(j + m))
        * fact(h(j - m))
        * fact(h(j1 - m1))
        * fact(h(j1 + m1))
        * fact(h(j2 - m2))
        * fact(h(j2 + m2));
    let mut sum = 0.0;
    for k in 0..=h(j1 + j2 - j) {
        let args = [
            h(j1 + j2 - j) - k,
            h(j1 - m1) - k,
            h(j2 + m2) - k,
            h(j - j2 + m1) + k,
            h(j - j1 - m2) + k,
        ];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let denom = fact(k) * args.iter().map(|&a| fact(a)).product::<f64>();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    libm::sqrt(pre) * sum
}

/// Clebsch–Gordan coefficient `⟨j1 m1; j2 m2 | J M⟩` for half-integer arguments.
pub fn cg_coefficient(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> f64 {
    let d = |x: f64| -> Option<i32> {
        let y = 2.0 * x;
        let r = libm::round(y);
        if (y - r).abs() > 1e-9 {
            None
        } else {
            Some(r as i32)
        }
    };
    match (d(j1), d(m1), d(j2), d(m2), d(j), d(m)) {
        (Some(a), Some(b), Some(c), Some(e), Some(f), Some(g)) if a >= 0 && c >= 0 && f >= 0 => {
            cg_doubled(a as u32, b, c as u32, e, f as u32, g)
        }
        _ => 0.0,
    }
}

/// Binary coupling tree over spin-1/2 leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CouplingTree {
    Leaf(usize),
    Node {
        left: Box<CouplingTree>,
        right: Box<CouplingTree>,
        spin2: u32,
    },
}

impl CouplingTree {
    pub fn leaf(index: usize) -> Self {
        CouplingTree::Leaf(index)
    }

    /// Couples `left` then `right` to total spin `spin2/2`.
    pub fn node(left: CouplingTree, right: CouplingTree, spin2: u32) -> Self {
        CouplingTree::Node {
            left: Box::new(left),
            right: Box::new(right),
            spin2,
        }
    }

    /// Effective spin-1 particle: a pair fixed in its triplet.
    pub fn triangle(i: usize, j: usize) -> Self {
        Self::node(Self::leaf(i), Self::leaf(j), 2)
    }

    /// Three spins coupled as `(i (j k)_{inner/2})_{1/2}`.
    pub fn star(i: usize, j: usize, k: usize, inner2: u32) -> Self {
        Self::node(Self::leaf(i), Self::node(Self::leaf(j), Self::leaf(k), inner2), 1)
    }

    pub fn spin2(&self) -> u32 {
        match self {
            CouplingTree::Leaf(_) => 1,
            CouplingTree::Node { spin2, .. } => *spin2,
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            CouplingTree::Leaf(i) => out.push(*i),
            CouplingTree::Node { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    pub fn validate(&self, n_spins: usize) -> Result<(), CouplingError> {
        let leaves = self.leaves();
        let mut seen = alloc::vec![false; n_spins.max(1)];
        for &l in &leaves {
            if l >= n_spins {
                return Err(CouplingError::LeafOutOfRange {
                    index: l,
                    n_spins,
                });
            }
            if seen[l] {
                return Err(CouplingError::DuplicateLeaf(l));
            }
            seen[l] = true;
        }
        self.check_triangles()
    }

    fn check_triangles(&self) -> Result<(), CouplingError> {
        if let CouplingTree::Node { left, right, spin2 } = self {
            left.check_triangles()?;
            right.check_triangles()?;
            if !triangle(left.spin2(), right.spin2(), *spin2) {
                return Err(CouplingError::Triangle {
                    left2: left.spin2(),
                    right2: right.spin2(),
                    total2: *spin2,
                });
            }
        }
        Ok(())
    }

    /// Sparse amplitudes keyed by the bitmask of down spins.
    fn amplitudes(&self, m2: i32, n: usize) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        match self {
            CouplingTree::Leaf(i) => {
                let key = if m2 < 0 { 1usize << (n - 1 - i) } else { 0 };
                out.insert(key, 1.0);
            }
            CouplingTree::Node { left, right, spin2 } => {
                let (jl, jr) = (left.spin2() as i32, right.spin2() as i32);
                let mut ml = -jl;
                while ml <= jl {
                    let mr = m2 - ml;
                    if mr.abs() <= jr {
                        let c = cg_doubled(jl as u32, ml, jr as u32, mr, *spin2, m2);
                        if c != 0.0 {
                            let a = left.amplitudes(ml, n);
                            let b = right.amplitudes(mr, n);
                            for (ka, va) in &a {
                                for (kb, vb) in &b {
                                    *out.entry(ka | kb).or_insert(0.0) += c * va * vb;
                                }
                            }
                        }
                    }
                    ml += 2;
                }
            }
        }
        out
    }
}

/// Product-space vector of a coupled state with root projection `m2/2`.
///
/// Spins outside the tree are spin-up.
pub fn coupled_state(tree: &CouplingTree, m2: i32, n_spins: usize) -> Result<StateVector, CouplingError> {
    if n_spins > MAX_SPINS {
        return Err(CouplingError::LeafOutOfRange {
            index: n_spins,
            n_spins: MAX_SPINS,
        });
    }
    tree.validate(n_spins)?;
    let s2 = tree.spin2();
    if m2.abs() > s2 as i32 || (s2 as i32 + m2) % 2 != 0 {
        return Err(CouplingError::InvalidProjection { spin2: s2, m2 });
    }
    let mut v = CVector::zeros(1 << n_spins);
    for (k, a) in tree.amplitudes(m2, n_spins) {
        v[k] = Complex64::new(a, 0.0);
    }
    Ok(StateVector::from_amplitudes(n_spins, v).expect("dimension fixed above"))
}

/// Columns are the coupled states of `trees` at projection `m2/2`.
pub fn basis_matrix(trees: &[CouplingTree], m2: i32, n_spins: usize) -> Result<CMatrix, CouplingError> {
    if trees.is_empty() {
        return Err(CouplingError::EmptyBasis);
    }
    let dim = 1 << n_spins;
    let mut m = CMatrix::zeros(dim, trees.len());
    for (k, t) in trees.iter().enumerate() {
        let s = coupled_state(t, m2, n_spins)?;
        m.set_column(k, s.amplitudes());
    }
    Ok(m)
}

/// Overlap matrix between two coupled bases of the same subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct RecouplingMatrix {
    pub source: Vec<CouplingTree>,
    pub target: Vec<CouplingTree>,
    /// `entries[(k, l)] = ⟨target_k | source_l⟩`.
    pub entries: CMatrix,
}

/// Overlaps `⟨target_k|source_l⟩` at the highest weight of the smaller root spin.
pub fn recoupling_matrix(
    source: &[CouplingTree],
    target: &[CouplingTree],
    n_spins: usize,
) -> Result<RecouplingMatrix, CouplingError> {
    if source.is_empty() || target.is_empty() {
        return Err(CouplingError::EmptyBasis);
    }
    let m2 = source
        .iter()
        .chain(target.iter())
        .map(|t| t.spin2() as i32)
        .min()
        .unwrap_or(0);
    let s = basis_matrix(source, m2, n_spins)?;
    let t = basis_matrix(target, m2, n_spins)?;
    let entries = t.adjoint() * &s;
    // both bases orthonormal and spanning the same space ⇔ overlap unitary
    let dev = if entries.nrows() == entries.ncols() {
        crate::spin_system::max_abs_diff(
            &(entries.adjoint() * &entries),
            &CMatrix::identity(entries.nrows(), entries.nrows()),
        )
    } else {
        f64::INFINITY
    };
    if dev > 1e-10 {
        return Err(CouplingError::SpanMismatch(dev));
    }
    Ok(RecouplingMatrix {
        source: source.to_vec(),
        target: target.to_vec(),
        entries,
    })
}

/// The three recoupling matrices with closed forms `f̂·σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recoupling {
    /// `(•(••)_a)_{1/2}` → `((••)_{a'}•)_{1/2}` on three spins.
    F1,
    /// `((••)_{b'}▲)_1` → `(•(•▲)_c)_1` on four spins.
    F2,
    /// `(▲(•▲)_c)_{1/2}` → `((▲•)_{c'}▲)_{1/2}` on five spins.
    F3,
}

pub const F1_AXIS: su2::Vec3 = [0.866_025_403_784_438_6, 0.0, -0.5];
pub const F2_AXIS: su2::Vec3 = [0.816_496_580_927_726, 0.0, -0.577_350_269_189_625_8];
pub const F3_AXIS: su2::Vec3 = [0.942_809_041_582_063_4, 0.0, -1.0 / 3.0];

impl Recoupling {
    pub fn n_spins(self) -> usize {
        match self {
            Recoupling::F1 => 3,
            Recoupling::F2 => 4,
            Recoupling::F3 => 5,
        }
    }

    pub fn axis(self) -> su2::Vec3 {
        match self {
            Recoupling::F1 => F1_AXIS,
            Recoupling::F2 => F2_AXIS,
            Recoupling::F3 => F3_AXIS,
        }
    }

    /// `(source, target)` bases, each ordered by intermediate spin.
    pub fn bases(self) -> (Vec<CouplingTree>, Vec<CouplingTree>) {
        use CouplingTree as T;
        match self {
            Recoupling::F1 => (
                [0, 2].iter().map(|&a| T::star(0, 1, 2, a)).collect(),
                [0, 2]
                    .iter()
                    .map(|&a| T::node(T::node(T::leaf(0), T::leaf(1), a), T::leaf(2), 1))
                    .collect(),
            ),
            Recoupling::F2 => (
                [0, 2]
                    .iter()
                    .map(|&b| T::node(T::node(T::leaf(0), T::leaf(1), b), T::triangle(2, 3), 2))
                    .collect(),
                [1, 3]
                    .iter()
                    .map(|&c| T::node(T::leaf(0), T::node(T::leaf(1), T::triangle(2, 3), c), 2))
                    .collect(),
            ),
            Recoupling::F3 => (
                [1, 3]
                    .iter()
                    .map(|&c| T::node(T::triangle(0, 1), T::node(T::leaf(2), T::triangle(3, 4), c), 1))
                    .collect(),
                [1, 3]
                    .iter()
                    .map(|&c| T::node(T::node(T::triangle(0, 1), T::leaf(2), c), T::triangle(3, 4), 1))
                    .collect(),
            ),
        }
    }

    /// Numeric overlaps with rows labelled by the target basis.
    pub fn numeric(self) -> Result<RecouplingMatrix, CouplingError> {
        let (s, t) = self.bases();
        recoupling_matrix(&s, &t, self.n_spins())
    }
}

/// Closed-form `f̂·σ` for the requested recoupling.
pub fn analytic_f(which: Recoupling) -> RecouplingMatrix {
    let (source, target) = which.bases();
    RecouplingMatrix {
        source,
        target,
        entries: su2::dot_sigma(which.axis()),
    }
}
