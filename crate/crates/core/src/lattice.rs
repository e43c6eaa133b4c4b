//! One-particle arena: a periodic 1-D lattice with unit spacing.
//!
//! Wavefunctions are plain complex vectors indexed by site, inner products
//! are unweighted sums, and the pair potential is stored by displacement.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Index;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance used when checking `V(d) == V(M - d)`.
const EVENNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lattice {
    sites: usize,
}

impl Lattice {
    pub fn new(sites: usize) -> Result<Self> {
        if sites < 2 {
            return Err(Error::LatticeTooSmall(sites));
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Minimal-image distance between two sites, in `0..=M/2`.
    pub fn distance(&self, x: usize, y: usize) -> usize {
        let d = (x + self.sites - y % self.sites) % self.sites;
        d.min(self.sites - d)
    }

    /// Displacement `x - y` reduced into `0..M`.
    pub fn displacement(&self, x: usize, y: usize) -> usize {
        (x % self.sites + self.sites - y % self.sites) % self.sites
    }

    /// Matrix element of `-Δ` (the kinetic operator `K`).
    pub fn kinetic(&self, x: usize, y: usize) -> f64 {
        let m = self.sites;
        let mut k = 0.0;
        if x == y {
            k += 2.0;
        }
        if (x + 1) % m == y {
            k -= 1.0;
        }
        if (y + 1) % m == x {
            k -= 1.0;
        }
        k
    }

    /// Eigenvalue of `-Δ` on the plane wave with momentum index `k`.
    pub fn kinetic_eigenvalue(&self, k: usize) -> f64 {
        2.0 * (1.0 - (2.0 * PI * k as f64 / self.sites as f64).cos())
    }
}

/// Complex amplitudes on the lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amps: Vec<C64>,
}

impl WaveFunction {
    pub fn new(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn zeros(sites: usize) -> Self {
        Self { amps: vec![C64::new(0.0, 0.0); sites] }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self { amps: values.iter().map(|&v| C64::new(v, 0.0)).collect() }
    }

    /// Unit vector at site `x`.
    pub fn site(sites: usize, x: usize) -> Self {
        let mut w = Self::zeros(sites);
        w.amps[x] = C64::new(1.0, 0.0);
        w
    }

    /// Normalized plane wave `e^{2πikx/M}/√M`.
    pub fn plane_wave(sites: usize, k: usize) -> Self {
        let scale = 1.0 / (sites as f64).sqrt();
        let amps = (0..sites)
            .map(|x| C64::from_polar(scale, 2.0 * PI * (k * x) as f64 / sites as f64))
            .collect();
        Self { amps }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.amps
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-10
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NotNormalized(n));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { amps: self.amps.iter().map(|&a| a * c).collect() }
    }

    /// Entrywise complex conjugate (the antiunitary `J`).
    pub fn conj(&self) -> Self {
        Self { amps: self.amps.iter().map(|a| a.conj()).collect() }
    }

    /// `|φ(x)|²` at every site.
    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Shift by `a` sites: `(T_a φ)(x) = φ(x - a)`.
    pub fn translated(&self, a: usize) -> Self {
        let m = self.len();
        let amps = (0..m).map(|x| self.amps[(x + m - a % m) % m]).collect();
        Self { amps }
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

impl Index<usize> for WaveFunction {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.amps[i]
    }
}

/// Real pair potential indexed by displacement `d = x - y (mod M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPotential {
    values: Vec<f64>,
}

impl PairPotential {
    /// Validates finiteness and evenness under minimal image.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m < 2 {
            return Err(Error::LatticeTooSmall(m));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("pair potential"));
        }
        for d in 1..m {
            let (fwd, bwd) = (values[d], values[m - d]);
            if (fwd - bwd).abs() > EVENNESS_TOL * fwd.abs().max(bwd.abs()).max(1.0) {
                return Err(Error::OddPotential { displacement: d, forward: fwd, backward: bwd });
            }
        }
        Ok(Self { values })
    }

    pub fn zero(sites: usize) -> Self {
        Self { values: vec![0.0; sites] }
    }

    /// `V(d) = strength · exp(-dist(d)² / (2 width²))` with minimal-image distance.
    pub fn gaussian(sites: usize, strength: f64, width: f64) -> Result<Self> {
        let lattice = Lattice::new(sites)?;
        let values = (0..sites)
            .map(|d| {
                let r = lattice.distance(d, 0) as f64;
                strength * (-(r * r) / (2.0 * width * width)).exp()
            })
            .collect();
        Self::new(values)
    }

    pub fn sites(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `V(x - y)` for two sites.
    pub fn between(&self, x: usize, y: usize) -> f64 {
        let m = self.values.len();
        self.values[(x % m + m - y % m) % m]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Periodic stencil `(Δφ)(x) = φ(x+1) - 2φ(x) + φ(x-1)`.
pub fn apply_laplacian(phi: &WaveFunction) -> WaveFunction {
    let m = phi.len();
    let p = phi.as_slice();
    let amps = (0..m)
        .map(|x| p[(x + 1) % m] - p[x] * 2.0 + p[(x + m - 1) % m])
        .collect();
    WaveFunction::new(amps)
}

/// Laplacian applied through the DFT, where it is diagonal.
pub fn apply_laplacian_spectral(phi: &WaveFunction) -> WaveFunction {
    let m = phi.len();
    let lattice = Lattice { sites: m };
    let dft = Dft::new(m);
    let mut modes = dft.forward(phi.as_slice());
    for (k, c) in modes.iter_mut().enumerate() {
        *c *= -lattice.kinetic_eigenvalue(k);
    }
    WaveFunction::new(dft.inverse(&modes))
}

/// Circular convolution `(V ⋆ ρ)(x) = Σ_y V(x - y) ρ(y)` by direct summation.
///
/// Summed over displacements `d = x - y` in a fixed order, so the result
/// commutes bit-for-bit with lattice translations.
pub fn convolve(v: &PairPotential, rho: &[f64]) -> Result<Vec<f64>> {
    let m = v.sites();
    check_len(m, rho.len())?;
    let vals = v.values();
    Ok((0..m)
        .map(|x| (0..m).map(|d| vals[d] * rho[(x + m - d) % m]).sum())
        .collect())
}

/// Same convolution through the DFT.
pub fn convolve_spectral(v: &PairPotential, rho: &[f64]) -> Result<Vec<f64>> {
    let m = v.sites();
    check_len(m, rho.len())?;
    let dft = Dft::new(m);
    let vk = dft.forward(&to_complex(v.values()));
    let rk = dft.forward(&to_complex(rho));
    let prod: Vec<C64> = vk.iter().zip(&rk).map(|(a, b)| a * b).collect();
    Ok(dft.inverse(&prod).iter().map(|c| c.re).collect())
}

/// Complex convolution `Σ_y V(x - y) f(y)`.
pub fn convolve_complex(v: &PairPotential, f: &[C64]) -> Result<Vec<C64>> {
    let m = v.sites();
    check_len(m, f.len())?;
    Ok((0..m)
        .map(|x| (0..m).map(|y| f[y] * v.between(x, y)).sum())
        .collect())
}

/// `⟨f, g⟩ = Σ_x conj(f(x)) g(x)`.
pub fn inner_product(f: &WaveFunction, g: &WaveFunction) -> Result<C64> {
    check_len(f.len(), g.len())?;
    Ok(dot(f.as_slice(), g.as_slice()))
}

pub(crate) fn dot(f: &[C64], g: &[C64]) -> C64 {
    f.iter().zip(g).map(|(a, b)| a.conj() * b).sum()
}

fn to_complex(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// Direct DFT with a cached twiddle table. Lattices here are small, so the
/// quadratic cost is irrelevant next to the many-body work.
#[derive(Debug, Clone)]
pub struct Dft {
    twiddle: Vec<C64>,
}

impl Dft {
    pub fn new(sites: usize) -> Self {
        let twiddle = (0..sites)
            .map(|j| C64::from_polar(1.0, -2.0 * PI * j as f64 / sites as f64))
            .collect();
        Self { twiddle }
    }

    /// `F_k = Σ_x e^{-2πikx/M} f_x`.
    pub fn forward(&self, f: &[C64]) -> Vec<C64> {
        let m = self.twiddle.len();
        (0..m)
            .map(|k| (0..m).map(|x| f[x] * self.twiddle[(k * x) % m]).sum())
            .collect()
    }

    /// Inverse of [`Dft::forward`], including the `1/M`.
    pub fn inverse(&self, fk: &[C64]) -> Vec<C64> {
        let m = self.twiddle.len();
        let scale = 1.0 / m as f64;
        (0..m)
            .map(|x| {
                let s: C64 = (0..m)
                    .map(|k| fk[k] * self.twiddle[(m - (k * x) % m) % m])
                    .sum();
                s * scale
            })
            .collect()
    }
}
