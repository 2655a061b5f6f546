//! Exchange-pulse algebra for encoded three-spin qubits.
//!
//! Sequences of Heisenberg exchange pulses are evaluated exactly on the full
//! `2^n` product space, projected onto coupled total-spin bases, rewritten
//! with exact pulse identities and checked against closed-form contracts.
//!
//! Register convention: spins are numbered from 0, spin 0 is the most
//! significant bit of a product-state index and a set bit means spin down.
//! Two encoded qubits occupy spins 0–2 and 3–5 as `(•(••)_a)_{1/2}` and
//! `(•(••)_b)_{1/2}`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coupling_basis;
pub mod encoded_analysis;
pub mod fixtures;
pub mod gate_library;
pub mod pulse_sequence;
pub mod rewrite_engine;
pub mod spin_system;
pub mod su2;

pub use num_complex::Complex64;
pub use spin_system::{CMatrix, CVector};
