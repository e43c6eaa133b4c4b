//! Generators of the fluctuation dynamics around a Hartree trajectory.
//!
//! With `D = K + diag(V⋆|φ|²) + V(x-y) φ(x) φ̄(y)` and `B = V(x-y) φ̄(x) φ̄(y)`,
//!
//! ```text
//! L_∞(t) = Σ D_xy a†_x a_y + ½ Σ (B̄_xy a†_x a†_y + B_xy a_x a_y)
//! L_N(t) = L_∞(t) + N^{-1/2} Σ_y (φ̄(y) C_y + φ(y) C_y†) + (2N)^{-1} Σ V(x-y) a†_x a†_y a_y a_x
//! ```
//!
//! where `C_y = (Σ_x V(x-y) n_x) a_y`. The pieces that do not depend on `φ`
//! are assembled once; evaluating at a new `φ` only rescales them.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::ops::{kinetic_matrix, pair_energy, Shifter, SecondQuantizedOperator, Symmetry};
use super::FockBasis;
use crate::error::{Error, Result};
use crate::lattice::{convolve, Lattice, PairPotential, WaveFunction};
use crate::linalg::CMatrix;
use crate::sparse::{CsrMatrix, PatternedSum};

fn sqrt(x: u32) -> f64 {
    (x as f64).sqrt()
}

fn build<F>(basis: &FockBasis, mut row: F) -> CsrMatrix
where
    F: FnMut(&[u8], &mut Shifter<'_>, &mut Vec<(u32, C64)>),
{
    let mut sh = Shifter::new(basis);
    CsrMatrix::from_rows(basis.len(), |i, buf| row(basis.occupation(i), &mut sh, buf))
}

fn hop(basis: &FockBasis, x: usize, y: usize) -> CsrMatrix {
    build(basis, |occ, sh, buf| {
        if occ[x] == 0 {
            return;
        }
        if x == y {
            buf.push((sh.index(occ, &[]).unwrap() as u32, C64::new(occ[x] as f64, 0.0)));
        } else if let Some(j) = sh.index(occ, &[(x, -1), (y, 1)]) {
            buf.push((j as u32, C64::new(sqrt(occ[x] as u32 * (occ[y] as u32 + 1)), 0.0)));
        }
    })
}

fn pair_creation(basis: &FockBasis, x: usize, y: usize) -> CsrMatrix {
    build(basis, |occ, sh, buf| {
        let (nx, ny) = (occ[x] as u32, occ[y] as u32);
        let amp = if x == y { sqrt(nx * nx.saturating_sub(1)) } else { sqrt(nx * ny) };
        if amp == 0.0 {
            return;
        }
        if let Some(j) = sh.index(occ, &[(x, -1), (y, -1)]) {
            buf.push((j as u32, C64::new(amp, 0.0)));
        }
    })
}

fn pair_annihilation(basis: &FockBasis, x: usize, y: usize) -> CsrMatrix {
    build(basis, |occ, sh, buf| {
        let (nx, ny) = (occ[x] as u32, occ[y] as u32);
        let amp = if x == y { sqrt((nx + 1) * (nx + 2)) } else { sqrt((nx + 1) * (ny + 1)) };
        if let Some(j) = sh.index(occ, &[(x, 1), (y, 1)]) {
            buf.push((j as u32, C64::new(amp, 0.0)));
        }
    })
}

fn weighted_count(v: &PairPotential, occ: &[u8], y: usize) -> f64 {
    occ.iter().enumerate().map(|(x, &n)| v.between(x, y) * n as f64).sum()
}

/// `C_y = (Σ_x V(x-y) n_x) a_y`.
fn cubic_lower(basis: &FockBasis, v: &PairPotential, y: usize) -> CsrMatrix {
    build(basis, |occ, sh, buf| {
        let w = weighted_count(v, occ, y);
        if w == 0.0 {
            return;
        }
        if let Some(j) = sh.index(occ, &[(y, 1)]) {
            buf.push((j as u32, C64::new(w * sqrt(occ[y] as u32 + 1), 0.0)));
        }
    })
}

/// `C_y† = a†_y (Σ_x V(x-y) n_x)`.
fn cubic_raise(basis: &FockBasis, v: &PairPotential, y: usize) -> CsrMatrix {
    build(basis, |occ, sh, buf| {
        if occ[y] == 0 {
            return;
        }
        let w = weighted_count(v, occ, y) - v.between(y, y);
        if w == 0.0 {
            return;
        }
        if let Some(j) = sh.index(occ, &[(y, -1)]) {
            buf.push((j as u32, C64::new(w * sqrt(occ[y] as u32), 0.0)));
        }
    })
}

fn quartic(basis: &FockBasis, v: &PairPotential) -> CsrMatrix {
    build(basis, |occ, sh, buf| {
        buf.push((sh.index(occ, &[]).unwrap() as u32, C64::new(pair_energy(v, occ), 0.0)));
    })
}

/// `(D_t)_xy = K_xy + δ_xy (V⋆|φ|²)(x) + V(x-y) φ(x) φ̄(y)`.
pub fn build_dt(phi: &WaveFunction, v: &PairPotential) -> Result<CMatrix> {
    if phi.len() != v.sites() {
        return Err(Error::DimensionMismatch { expected: v.sites(), found: phi.len() });
    }
    let m = phi.len();
    let k = kinetic_matrix(&Lattice::new(m)?);
    let mf = convolve(v, &phi.density())?;
    Ok(CMatrix::from_fn(m, m, |x, y| {
        let diag = if x == y { mf[x] } else { 0.0 };
        k[(x, y)] + diag + phi[x] * phi[y].conj() * v.between(x, y)
    }))
}

/// `(B_t)_xy = V(x-y) φ̄(x) φ̄(y)`, complex symmetric.
pub fn build_bt(phi: &WaveFunction, v: &PairPotential) -> Result<CMatrix> {
    if phi.len() != v.sites() {
        return Err(Error::DimensionMismatch { expected: v.sites(), found: phi.len() });
    }
    let m = phi.len();
    Ok(CMatrix::from_fn(m, m, |x, y| (phi[x] * phi[y]).conj() * v.between(x, y)))
}

/// Family `L(φ)` over a fixed basis, potential and (optionally) `N`.
#[derive(Debug, Clone)]
pub struct FluctuationGenerator {
    basis: Arc<FockBasis>,
    potential: PairPotential,
    particles: Option<usize>,
    family: PatternedSum,
}

impl FluctuationGenerator {
    /// `particles = Some(N)` gives `L_N`, `None` gives `L_∞`.
    pub fn new(basis: &Arc<FockBasis>, v: &PairPotential, particles: Option<usize>) -> Result<Self> {
        if v.sites() != basis.sites() {
            return Err(Error::DimensionMismatch { expected: basis.sites(), found: v.sites() });
        }
        if !basis.is_full() {
            return Err(Error::NotFullFock);
        }
        if particles == Some(0) {
            return Err(Error::InvalidParameter("the fluctuation generator needs N ≥ 1"));
        }
        let m = basis.sites();
        let mut pieces = Vec::new();
        for x in 0..m {
            for y in 0..m {
                pieces.push(hop(basis, x, y));
            }
        }
        for x in 0..m {
            for y in x..m {
                pieces.push(pair_creation(basis, x, y));
                pieces.push(pair_annihilation(basis, x, y));
            }
        }
        if particles.is_some() {
            for y in 0..m {
                pieces.push(cubic_lower(basis, v, y));
                pieces.push(cubic_raise(basis, v, y));
            }
            pieces.push(quartic(basis, v));
        }
        Ok(Self {
            basis: basis.clone(),
            potential: v.clone(),
            particles,
            family: PatternedSum::new(basis.len(), &pieces),
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn potential(&self) -> &PairPotential {
        &self.potential
    }

    pub fn particles(&self) -> Option<usize> {
        self.particles
    }

    fn coefficients(&self, phi: &WaveFunction) -> Result<Vec<C64>> {
        let m = self.basis.sites();
        let d = build_dt(phi, &self.potential)?;
        let b = build_bt(phi, &self.potential)?;
        let mut c = Vec::with_capacity(self.family.pieces());
        for x in 0..m {
            for y in 0..m {
                c.push(d[(x, y)]);
            }
        }
        for x in 0..m {
            for y in x..m {
                let half = if x == y { 0.5 } else { 1.0 };
                c.push(b[(x, y)].conj() * half);
                c.push(b[(x, y)] * half);
            }
        }
        if let Some(n) = self.particles {
            let s = 1.0 / (n as f64).sqrt();
            for y in 0..m {
                c.push(phi[y].conj() * s);
                c.push(phi[y] * s);
            }
            c.push(C64::new(0.5 / n as f64, 0.0));
        }
        debug_assert_eq!(c.len(), self.family.pieces());
        Ok(c)
    }

    /// The generator evaluated at the Hartree state `φ`.
    pub fn at(&self, phi: &WaveFunction) -> Result<SecondQuantizedOperator> {
        let coefs = self.coefficients(phi)?;
        let matrix = self.family.assemble(&coefs);
        Ok(SecondQuantizedOperator::trusted(self.basis.clone(), matrix, Symmetry::Hermitian, false))
    }
}

/// `L_N(t)` at the Hartree state `φ_t`.
pub fn build_ln_generator(
    phi: &WaveFunction,
    v: &PairPotential,
    n: usize,
    basis: &Arc<FockBasis>,
) -> Result<SecondQuantizedOperator> {
    FluctuationGenerator::new(basis, v, Some(n))?.at(phi)
}

/// `L_∞(t)` at the Hartree state `φ_t`.
pub fn build_linfty_generator(
    phi: &WaveFunction,
    v: &PairPotential,
    basis: &Arc<FockBasis>,
) -> Result<SecondQuantizedOperator> {
    FluctuationGenerator::new(basis, v, None)?.at(phi)
}

/// Scalar `μ_N(t) = -(N/2) ⟨|φ_t|², V⋆|φ_t|²⟩` such that the Weyl-conjugated
/// propagator obeys `i∂_t U = (L_N(t) + μ_N(t)) U`.
pub fn fluctuation_phase_rate(phi: &WaveFunction, v: &PairPotential, n: usize) -> Result<f64> {
    let rho = phi.density();
    let mf = convolve(v, &rho)?;
    Ok(-0.5 * n as f64 * rho.iter().zip(&mf).map(|(a, b)| a * b).sum::<f64>())
}
