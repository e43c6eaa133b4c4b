//! One- and two-particle reduced densities and the mean-field convergence
//! study.
//!
//! Kernels follow `Γ(x,y) = (1/N) ⟨ψ, a†_y a_x ψ⟩`; the order-2 density uses
//! the composite index `x·M + y` and
//! `Γ[(x,y),(x',y')] = ⟨ψ, a†_{x'} a†_{y'} a_y a_x ψ⟩ / (N(N-1))`.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fit::{power_law_fit, NOISE_FLOOR};
use crate::fock::{evolve, product_state, sector_dimension, Assemble, FockBasis, FockState, HamiltonianSource};
use crate::hartree::{hartree_evolve, HartreeTrajectory};
use crate::krylov::KrylovOptions;
use crate::lattice::{dot, PairPotential, WaveFunction};
use crate::linalg::CMatrix;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Hermitian, positive, trace-one matrix on one- or two-particle space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    order: usize,
    sites: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates shape and the invariants: Hermitian to `1e-12`, eigenvalues
    /// `≥ -1e-10`, trace `1 ± 1e-9`.
    pub fn new(order: usize, sites: usize, matrix: CMatrix) -> Result<Self> {
        if order == 0 || order > 2 {
            return Err(Error::InvalidParameter("density matrices are implemented for orders 1 and 2"));
        }
        let dim = sites.pow(order as u32);
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.rows() });
        }
        let d = Self { order, sites, matrix };
        d.check()?;
        Ok(d)
    }

    pub(crate) fn unchecked(order: usize, sites: usize, matrix: CMatrix) -> Self {
        Self { order, sites, matrix }
    }

    /// `|φ⟩⟨φ|^{⊗order}` for normalized `φ`.
    pub fn pure(phi: &WaveFunction, order: usize) -> Result<Self> {
        if !phi.is_normalized() {
            return Err(Error::NotNormalized(phi.norm()));
        }
        let v: Vec<C64> = match order {
            1 => phi.as_slice().to_vec(),
            2 => phi.as_slice().iter().flat_map(|&a| phi.as_slice().iter().map(move |&b| a * b)).collect(),
            _ => return Err(Error::InvalidParameter("density matrices are implemented for orders 1 and 2")),
        };
        Ok(Self::unchecked(order, phi.len(), CMatrix::outer(&v, &v)))
    }

    pub fn check(&self) -> Result<()> {
        let herm = self.matrix.hermitian_deviation();
        if herm > 1e-12 {
            return Err(Error::DensityInvariant { what: "not Hermitian", value: herm });
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::DensityInvariant { what: "trace differs from one", value: tr - 1.0 });
        }
        let low = self.eigenvalues().first().copied().unwrap_or(0.0);
        if low < -1e-10 {
            return Err(Error::DensityInvariant { what: "negative eigenvalue", value: low });
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues()
    }

    /// Trace over the second particle of an order-2 density.
    pub fn partial_trace(&self) -> Result<Self> {
        if self.order != 2 {
            return Err(Error::InvalidParameter("partial trace needs an order-2 density"));
        }
        let m = self.sites;
        let mat = CMatrix::from_fn(m, m, |x, xp| (0..m).map(|y| self.matrix[(x * m + y, xp * m + y)]).sum());
        Ok(Self::unchecked(1, m, mat))
    }

    /// `tr(Γ A)` for a matrix of matching dimension.
    pub fn expectation(&self, a: &CMatrix) -> Result<C64> {
        let d = self.matrix.rows();
        if a.rows() != d || a.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: a.rows() });
        }
        Ok((&self.matrix * a).trace())
    }
}

/// Sum of absolute eigenvalues of `A - B`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.order != b.order || a.sites != b.sites {
        return Err(Error::DimensionMismatch { expected: a.matrix.rows(), found: b.matrix.rows() });
    }
    Ok((&a.matrix - &b.matrix).trace_norm_hermitian())
}

/// `a_{x_1} ⋯ a_{x_k} ψ` for every nondecreasing tuple, on a basis lowered
/// by `k` particles. Returned in lexicographic tuple order.
fn lowered_vectors(psi: &FockState, k: usize) -> Vec<Vec<C64>> {
    let basis = psi.basis();
    let m = basis.sites();
    let hi = basis.n_max();
    if hi < k {
        let count = if k == 1 { m } else { m * (m + 1) / 2 };
        return vec![Vec::new(); count];
    }
    let lo = basis.n_min().saturating_sub(k);
    let low = FockBasis::with_sectors(m, lo, hi - k).expect("smaller than the source basis");
    let tuples: Vec<(usize, usize)> = if k == 1 {
        (0..m).map(|x| (x, usize::MAX)).collect()
    } else {
        (0..m).flat_map(|x| (x..m).map(move |y| (x, y))).collect()
    };
    let mut out = vec![vec![ZERO; low.len()]; tuples.len()];
    let mut scratch = vec![0u8; m];
    for (i, &a) in psi.amplitudes().iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let occ = basis.occupation(i);
        for (slot, &(x, y)) in tuples.iter().enumerate() {
            scratch.copy_from_slice(occ);
            if scratch[x] == 0 {
                continue;
            }
            let mut amp = (scratch[x] as f64).sqrt();
            scratch[x] -= 1;
            if y != usize::MAX {
                if scratch[y] == 0 {
                    continue;
                }
                amp *= (scratch[y] as f64).sqrt();
                scratch[y] -= 1;
            }
            if let Some(j) = low.index(&scratch) {
                out[slot][j] += a * amp;
            }
        }
    }
    out
}

/// `⟨a_y ψ, a_x ψ⟩` without normalization.
pub(crate) fn gamma1_raw(psi: &FockState) -> CMatrix {
    let v = lowered_vectors(psi, 1);
    let m = psi.basis().sites();
    let mut g = CMatrix::zeros(m, m);
    for x in 0..m {
        for y in x..m {
            let z = dot(&v[y], &v[x]);
            g[(x, y)] = z;
            g[(y, x)] = z.conj();
        }
    }
    for x in 0..m {
        g[(x, x)] = C64::new(g[(x, x)].re, 0.0);
    }
    g
}

/// `⟨a_{y'} a_{x'} ψ, a_y a_x ψ⟩` on composite indices, without normalization.
pub(crate) fn gamma2_raw(psi: &FockState) -> CMatrix {
    let v = lowered_vectors(psi, 2);
    let m = psi.basis().sites();
    let slot = |x: usize, y: usize| {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        a * m - a * (a + 1) / 2 + b
    };
    let d = m * m;
    let mut g = CMatrix::zeros(d, d);
    for p in 0..d {
        for q in p..d {
            let z = dot(&v[slot(q / m, q % m)], &v[slot(p / m, p % m)]);
            g[(p, q)] = z;
            g[(q, p)] = z.conj();
        }
        g[(p, p)] = C64::new(g[(p, p)].re, 0.0);
    }
    g
}

/// `Γ(x,y) = (1/N) ⟨ψ, a†_y a_x ψ⟩`, validated as a density matrix.
pub fn gamma1(psi: &FockState, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::TooFewParticles { needed: 1, found: 0 });
    }
    let g = gamma1_raw(psi).scale(C64::new(1.0 / n as f64, 0.0));
    DensityMatrix::new(1, psi.basis().sites(), g)
}

/// Two-particle density normalized by `N(N-1)`, validated.
pub fn gamma2(psi: &FockState, n: usize) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::TooFewParticles { needed: 2, found: n });
    }
    let g = gamma2_raw(psi).scale(C64::new(1.0 / (n * (n - 1)) as f64, 0.0));
    DensityMatrix::new(2, psi.basis().sites(), g)
}

/// Initial many-body data for the convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    /// `φ^{⊗N}` in sector `N`.
    Product,
    /// `W(√N φ) Ω`, Poisson-distributed particle number with mean `N`.
    Coherent,
}

/// Largest particle number kept for data of expected size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// `N` for product data, `N + ⌈6√N⌉ + 6` for coherent data.
    Auto,
    /// The automatic value plus a margin.
    Extra(usize),
    Fixed(usize),
}

impl Cutoff {
    pub fn resolve(self, n: usize, data: InitialData) -> usize {
        let auto = match data {
            InitialData::Product => n,
            InitialData::Coherent => coherent_cutoff(n),
        };
        match self {
            Cutoff::Auto => auto,
            Cutoff::Extra(k) => auto + k,
            Cutoff::Fixed(k) => k.max(n),
        }
    }
}

/// `N + ⌈6√N⌉ + 6`; the Poisson tail beyond it is below `1e-9`.
pub fn coherent_cutoff(n: usize) -> usize {
    n + (6.0 * (n as f64).sqrt()).ceil() as usize + 6
}

/// Poisson weight `e^{-N} N^n / n!`.
pub fn poisson_weight(mean: f64, n: usize) -> f64 {
    let mut log = -mean + n as f64 * mean.ln();
    for k in 2..=n {
        log -= (k as f64).ln();
    }
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    log.exp()
}

#[derive(Debug, Clone)]
pub struct ConvergenceSetup {
    pub phi0: WaveFunction,
    pub potential: PairPotential,
    /// Times at which distances are reported; must lie on the `dt` grid.
    pub times: Vec<f64>,
    pub particles: Vec<usize>,
    pub data: InitialData,
    pub cutoff: Cutoff,
    pub dt: f64,
    pub gamma2: bool,
    /// Upper bound for the estimated peak memory, in bytes.
    pub memory_budget: u64,
    pub krylov: KrylovOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub t: f64,
    pub distance1: f64,
    pub distance2: Option<f64>,
    /// Particle-number weight lost to the cutoff (coherent data).
    pub deficit: f64,
    /// Basis size of the largest sector propagated.
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// `(t, exponent)` of `distance1 ∝ N^exponent`, for every `t` with
    /// positive distances.
    pub exponents: Vec<(f64, f64)>,
}

/// Peak bytes for propagating one sector: occupations, the sparse
/// Hamiltonian and the Krylov basis.
pub fn sector_memory_estimate(sites: usize, n: usize, krylov: KrylovOptions) -> Option<u64> {
    let d = sector_dimension(sites, n)?;
    let per_state = sites as u64 + (2 * sites as u64 + 1) * 20 + 16 * (krylov.max_dim as u64 + 4);
    d.checked_mul(per_state)
}

impl ConvergenceSetup {
    /// Largest sector this setup will propagate for `n`, checked against the
    /// budget.
    pub fn feasibility(&self, n: usize) -> Result<(usize, u64)> {
        let top = self.cutoff.resolve(n, self.data);
        let m = self.phi0.len();
        let bytes = sector_memory_estimate(m, top, self.krylov).ok_or(Error::Infeasible { bytes: u64::MAX, budget: self.memory_budget })?;
        if bytes > self.memory_budget {
            return Err(Error::Infeasible { bytes, budget: self.memory_budget });
        }
        Ok((top, bytes))
    }

    pub fn trajectory(&self) -> Result<HartreeTrajectory> {
        let end = self.times.iter().copied().fold(0.0, f64::max);
        hartree_evolve(&self.phi0, &self.potential, end, self.dt)
    }
}

struct Accumulated {
    g1: Vec<CMatrix>,
    g2: Vec<CMatrix>,
}

/// Evolves `φ0^{⊗n}` with `H_N` in sector `n` and adds `weight × raw
/// densities` at each requested time.
fn accumulate_sector<S: HamiltonianSource + ?Sized>(
    source: &S,
    setup: &ConvergenceSetup,
    traj: &HartreeTrajectory,
    big_n: usize,
    n: usize,
    weight: f64,
    acc: &mut Accumulated,
) -> Result<usize> {
    let basis = Arc::new(FockBasis::sector(setup.phi0.len(), n)?);
    let h = source.hamiltonian(&setup.potential, big_n, &basis)?;
    let mut psi = product_state(&setup.phi0, n, &basis)?;
    let mut now = 0.0;
    let w = C64::new(weight, 0.0);
    for (k, &t) in setup.times.iter().enumerate() {
        let grid_t = traj.time(traj.index_of(t)?);
        psi = evolve(&h, &psi, grid_t - now, setup.krylov)?.0;
        now = grid_t;
        acc.g1[k] = &acc.g1[k] + &gamma1_raw(&psi).scale(w);
        if setup.gamma2 && n >= 2 {
            acc.g2[k] = &acc.g2[k] + &gamma2_raw(&psi).scale(w);
        }
    }
    Ok(basis.len())
}

/// All rows for one particle number `n`, in the order of `setup.times`.
pub fn convergence_point<S: HamiltonianSource + ?Sized>(
    source: &S,
    setup: &ConvergenceSetup,
    traj: &HartreeTrajectory,
    n: usize,
) -> Result<Vec<ConvergenceRow>> {
    if n == 0 {
        return Err(Error::TooFewParticles { needed: 1, found: 0 });
    }
    let (top, _) = setup.feasibility(n)?;
    let m = setup.phi0.len();
    let nt = setup.times.len();
    let mut acc = Accumulated { g1: vec![CMatrix::zeros(m, m); nt], g2: vec![CMatrix::zeros(m * m, m * m); nt] };
    let (norm1, norm2, deficit, dimension) = match setup.data {
        InitialData::Product => {
            let dim = accumulate_sector(source, setup, traj, n, n, 1.0, &mut acc)?;
            (n as f64, (n * n.saturating_sub(1)) as f64, 0.0, dim)
        }
        InitialData::Coherent => {
            let mean = n as f64;
            let mut kept = poisson_weight(mean, 0);
            let mut dim = 0;
            for k in 1..=top {
                let p = poisson_weight(mean, k);
                kept += p;
                dim = dim.max(accumulate_sector(source, setup, traj, n, k, p, &mut acc)?);
            }
            (mean, mean * mean, (1.0 - kept).max(0.0), dim)
        }
    };
    let mut rows = Vec::with_capacity(nt);
    for (k, &t) in setup.times.iter().enumerate() {
        let phi_t = traj.at(t)?;
        let g1 = DensityMatrix::new(1, m, acc.g1[k].scale(C64::new(1.0 / norm1, 0.0)))?;
        let distance1 = trace_distance(&g1, &DensityMatrix::pure(phi_t, 1)?)?;
        let distance2 = if setup.gamma2 && n >= 2 {
            let g2 = DensityMatrix::new(2, m, acc.g2[k].scale(C64::new(1.0 / norm2, 0.0)))?;
            Some(trace_distance(&g2, &DensityMatrix::pure(phi_t, 2)?)?)
        } else {
            None
        };
        rows.push(ConvergenceRow { n, t, distance1, distance2, deficit, dimension });
    }
    Ok(rows)
}

/// Fits `distance1 ∝ N^p` at each time where all distances exceed
/// [`NOISE_FLOOR`].
pub fn fit_exponents(times: &[f64], rows: &[ConvergenceRow]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &t in times {
        let (ns, ds): (Vec<f64>, Vec<f64>) =
            rows.iter().filter(|r| r.t == t).map(|r| (r.n as f64, r.distance1)).unzip();
        if ns.len() >= 2 && ds.iter().all(|&d| d > NOISE_FLOOR) {
            if let Ok(f) = power_law_fit(&ns, &ds) {
                out.push((t, f.exponent));
            }
        }
    }
    out
}

/// For each `N` and `t`: exact evolution, `γ^(1)` (optionally `γ^(2)`) and
/// the trace distance to the Hartree projector. Every size is checked
/// against the memory budget before anything is allocated.
pub fn convergence_study(setup: &ConvergenceSetup) -> Result<ConvergenceTable> {
    for &n in &setup.particles {
        setup.feasibility(n)?;
    }
    let traj = setup.trajectory()?;
    let mut rows = Vec::new();
    for &n in &setup.particles {
        rows.extend(convergence_point(&Assemble, setup, &traj, n)?);
    }
    let exponents = fit_exponents(&setup.times, &rows);
    Ok(ConvergenceTable { rows, exponents })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_distance_examples() {
        let a = DensityMatrix::pure(&WaveFunction::site(3, 0), 1).unwrap();
        let b = DensityMatrix::pure(&WaveFunction::site(3, 2), 1).unwrap();
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert!((trace_distance(&a, &b).unwrap() - 2.0).abs() < 1e-12);
        let c = DensityMatrix::pure(&WaveFunction::site(2, 0), 1).unwrap();
        assert!(trace_distance(&a, &c).is_err());
    }

    #[test]
    fn invariants_are_enforced() {
        let bad = CMatrix::from_fn(2, 2, |i, j| C64::new(if i == j { 0.5 } else { 0.6 }, 0.0));
        assert!(matches!(DensityMatrix::new(1, 2, bad), Err(Error::DensityInvariant { what: "negative eigenvalue", .. })));
        let half = CMatrix::identity(2).scale(C64::new(0.4, 0.0));
        assert!(matches!(DensityMatrix::new(1, 2, half), Err(Error::DensityInvariant { .. })));
        assert!(gamma2(&FockState::vacuum(Arc::new(FockBasis::new(2, 2).unwrap())).unwrap(), 1).is_err());
    }

    #[test]
    fn cutoffs_and_weights() {
        assert_eq!(coherent_cutoff(12), 39);
        assert_eq!(coherent_cutoff(4), 22);
        assert_eq!(Cutoff::Auto.resolve(8, InitialData::Product), 8);
        assert_eq!(Cutoff::Extra(3).resolve(4, InitialData::Coherent), 25);
        let total: f64 = (0..80).map(|k| poisson_weight(12.0, k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let tail: f64 = (40..120).map(|k| poisson_weight(12.0, k)).sum();
        assert!(tail < 1e-9);
    }
}
