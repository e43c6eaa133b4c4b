#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::FockBasis;
use crate::error::{Error, Result};
use crate::lattice::dot;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Amplitude vector over a shared [`FockBasis`].
#[derive(Debug, Clone)]
pub struct FockState {
    basis: Arc<FockBasis>,
    amps: Vec<C64>,
}

impl PartialEq for FockState {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) && self.amps == other.amps
    }
}

impl FockState {
    pub fn new(basis: Arc<FockBasis>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: amps.len() });
        }
        Ok(Self { basis, amps })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let amps = vec![ZERO; basis.len()];
        Self { basis, amps }
    }

    /// `Ω`, the state with no particles.
    pub fn vacuum(basis: Arc<FockBasis>) -> Result<Self> {
        if !basis.is_full() {
            return Err(Error::NotFullFock);
        }
        Ok(Self::basis_state(basis, 0))
    }

    pub fn basis_state(basis: Arc<FockBasis>, i: usize) -> Self {
        let mut s = Self::zeros(basis);
        s.amps[i] = C64::new(1.0, 0.0);
        s
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub(crate) fn with_amplitudes(&self, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), self.amps.len());
        Self { basis: self.basis.clone(), amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-8
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        self.with_amplitudes(self.amps.iter().map(|&z| z * c).collect())
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same_basis(other)?;
        Ok(dot(&self.amps, &other.amps))
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: C64, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(self.with_amplitudes(self.amps.iter().zip(&other.amps).map(|(&a, &b)| a + c * b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(C64::new(-1.0, 0.0), other)
    }

    pub(crate) fn check_same_basis(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.basis, &other.basis) && self.basis.fingerprint() != other.basis.fingerprint() {
            return Err(Error::DimensionMismatch { expected: self.basis.len(), found: other.basis.len() });
        }
        Ok(())
    }

    /// `‖P_n ψ‖²` for every stored sector, indexed from `n_min`.
    pub fn sector_weights(&self) -> Vec<f64> {
        (self.basis.n_min()..=self.basis.n_max())
            .map(|n| self.sector_weight(n))
            .collect()
    }

    pub fn sector_weight(&self, n: usize) -> f64 {
        match self.basis.sector_range(n) {
            Ok(r) => self.amps[r].iter().map(|z| z.norm_sqr()).sum(),
            Err(_) => 0.0,
        }
    }

    /// Weight in the highest stored sector, the first place truncation shows.
    pub fn top_sector_weight(&self) -> f64 {
        self.sector_weight(self.basis.n_max())
    }

    /// Largest particle number carrying weight above `tol`.
    pub fn max_occupied_sector(&self, tol: f64) -> Option<usize> {
        (self.basis.n_min()..=self.basis.n_max())
            .rev()
            .find(|&n| self.sector_weight(n) > tol)
    }

    /// `⟨ψ, 𝒩 ψ⟩`.
    pub fn mean_particles(&self) -> f64 {
        (self.basis.n_min()..=self.basis.n_max())
            .map(|n| n as f64 * self.sector_weight(n))
            .sum()
    }

    /// `P_n ψ`; zero if `n` lies outside the stored sectors.
    pub fn project_sector(&self, n: usize) -> Self {
        let mut out = Self::zeros(self.basis.clone());
        if let Ok(r) = self.basis.sector_range(n) {
            out.amps[r.clone()].copy_from_slice(&self.amps[r]);
        }
        out
    }

    /// Keeps sectors `n ≤ top` and zeroes the rest.
    pub fn project_up_to(&self, top: usize) -> Self {
        let mut out = self.clone();
        if top < self.basis.n_max() {
            let start = self.basis.sector_range((top + 1).max(self.basis.n_min())).unwrap().start;
            for z in &mut out.amps[start..] {
                *z = ZERO;
            }
        }
        out
    }

    /// Copies amplitudes onto another basis over the same sites. Components
    /// outside the target's sectors are dropped and their weight returned.
    pub fn transfer(&self, target: &Arc<FockBasis>) -> Result<(Self, f64)> {
        if target.sites() != self.basis.sites() {
            return Err(Error::DimensionMismatch { expected: target.sites(), found: self.basis.sites() });
        }
        let mut out = Self::zeros(target.clone());
        let mut lost = 0.0;
        for (i, &a) in self.amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            match target.index(self.basis.occupation(i)) {
                Some(j) => out.amps[j] = a,
                None => lost += a.norm_sqr(),
            }
        }
        Ok((out, lost))
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}
