//! Mean-field dynamics of bosons on a periodic lattice.
//!
//! The crate is `no_std` (it needs `alloc`). It covers the one-particle
//! lattice, the Hartree equation, a truncated bosonic Fock space with
//! Krylov propagation, reduced densities, the limiting Bogoliubov
//! fluctuation dynamics, and LLN/CLT statistics of one-body observables.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod lattice;
pub mod linalg;
pub mod sparse;
pub mod krylov;
pub mod hartree;
pub mod fock;
pub mod fit;
pub mod reduced;
pub mod bogoliubov;
pub mod statistics;

pub use error::{Error, Result};
pub use lattice::{Lattice, PairPotential, WaveFunction};
pub use num_complex::Complex64 as C64;

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
