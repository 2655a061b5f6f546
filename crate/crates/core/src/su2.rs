//! 2×2 pseudospin helpers: Pauli matrices, axis rotations, Bloch vectors.

use num_complex::Complex64;

use crate::spin_system::CMatrix;

pub type Vec3 = [f64; 3];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity() -> CMatrix {
    CMatrix::identity(2, 2)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `n̂·σ`.
pub fn dot_sigma(n: Vec3) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[c(n[2], 0.0), c(n[0], -n[1]), c(n[0], n[1]), c(-n[2], 0.0)],
    )
}

/// `e^{iθ n̂·σ} = cos θ·1 + i sin θ·n̂·σ` for a unit vector `n̂`.
pub fn exp_i_sigma(theta: f64, n: Vec3) -> CMatrix {
    let (s, co) = (libm::sin(theta), libm::cos(theta));
    identity() * c(co, 0.0) + dot_sigma(n) * c(0.0, s)
}

pub fn diag(a: Complex64, b: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, c(0.0, 0.0), c(0.0, 0.0), b])
}

pub fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn scale(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn max_abs3(a: Vec3) -> f64 {
    a.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

/// Bloch vector `m` with `m·σ = U (n̂·σ) U†`.
pub fn conjugate_axis(u: &CMatrix, n: Vec3) -> Vec3 {
    let m = u * dot_sigma(n) * u.adjoint();
    [
        (m[(0, 1)] + m[(1, 0)]).re / 2.0,
        (m[(1, 0)] - m[(0, 1)]).im / 2.0,
        (m[(0, 0)] - m[(1, 1)]).re / 2.0,
    ]
}

/// Real 3-vector `r` with `M = r·σ`, for Hermitian traceless `M`.
pub fn sigma_components(m: &CMatrix) -> Vec3 {
    [
        (m[(0, 1)] + m[(1, 0)]).re / 2.0,
        (m[(1, 0)] - m[(0, 1)]).im / 2.0,
        (m[(0, 0)] - m[(1, 1)]).re / 2.0,
    ]
}
