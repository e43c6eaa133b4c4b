//! Law of large numbers and central limit diagnostics for one-body
//! observables under the exact many-body evolution.
//!
//! For a state in sector `N` the fluctuation variable is
//! `S = N^{-1/2} Σ_j (O^{(j)} - ⟨φ_t, O φ_t⟩) = N^{-1/2} (dΓ(O) - N⟨O⟩_t)`.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::bogoliubov::{classical_variance, sigma_t, theta_path};
use crate::error::{Error, Result};
use crate::fit::{power_law_fit, NOISE_FLOOR};
use crate::fock::{
    evolve, one_body_operator, product_state, Assemble, FockBasis, FockState, HamiltonianSource, SecondQuantizedOperator,
};
use crate::hartree::{hartree_evolve, HartreeTrajectory};
use crate::krylov::KrylovOptions;
use crate::lattice::{dot, PairPotential, WaveFunction};
use crate::linalg::CMatrix;
use crate::reduced::sector_memory_estimate;

/// Weight allowed outside sector `N` before a state is rejected.
const SECTOR_TOL: f64 = 1e-12;

/// Hermitian one-particle observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpec {
    label: String,
    matrix: CMatrix,
}

impl ObservableSpec {
    pub fn new(label: impl Into<String>, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.rows(), found: matrix.cols() });
        }
        let dev = matrix.hermitian_deviation();
        if !(dev <= 1e-12) {
            return Err(Error::ObservableNotHermitian(dev));
        }
        Ok(Self { label: label.into(), matrix })
    }

    /// Multiplication by `cos(2πx/M)`.
    pub fn cosine(sites: usize) -> Self {
        let matrix = CMatrix::from_fn(sites, sites, |x, y| {
            let v = if x == y { (2.0 * core::f64::consts::PI * x as f64 / sites as f64).cos() } else { 0.0 };
            C64::new(v, 0.0)
        });
        Self { label: String::from("cosine"), matrix }
    }

    /// `(T + T†)/2` for the unit lattice translation `T`.
    pub fn hopping(sites: usize) -> Self {
        let matrix = CMatrix::from_fn(sites, sites, |x, y| {
            let mut v = 0.0;
            if (x + 1) % sites == y {
                v += 0.5;
            }
            if (y + 1) % sites == x {
                v += 0.5;
            }
            C64::new(v, 0.0)
        });
        Self { label: String::from("hopping"), matrix }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn sites(&self) -> usize {
        self.matrix.rows()
    }

    /// `⟨φ, Oφ⟩`.
    pub fn mean(&self, phi: &WaveFunction) -> Result<f64> {
        if phi.len() != self.sites() {
            return Err(Error::DimensionMismatch { expected: self.sites(), found: phi.len() });
        }
        Ok(dot(phi.as_slice(), &self.matrix.mul_vec(phi.as_slice())).re)
    }

    /// `O - ⟨φ, Oφ⟩ 1`.
    pub fn centered(&self, phi: &WaveFunction) -> Result<CMatrix> {
        let mean = self.mean(phi)?;
        Ok(&self.matrix - &CMatrix::identity(self.sites()).scale(C64::new(mean, 0.0)))
    }
}


#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub n: usize,
    pub t: f64,
    /// `E[S]`; zero up to propagation error.
    pub mean: f64,
    /// `E[S²]`.
    pub variance: f64,
    /// `E[S⁴]`.
    pub fourth: f64,
    /// `E[S⁴]/E[S²]²`; `None` when the variance vanishes.
    pub kurtosis: Option<f64>,
}

/// `dΓ(O)` on the basis of `psi`, for use with [`moments_with`].
pub fn second_quantize(obs: &ObservableSpec, basis: &Arc<FockBasis>) -> Result<SecondQuantizedOperator> {
    one_body_operator(basis, obs.matrix())
}

fn check_sector(psi: &FockState, n: usize) -> Result<()> {
    let stray = (psi.norm_sqr() - psi.sector_weight(n)).abs();
    if stray > SECTOR_TOL {
        return Err(Error::SectorMismatch { sector: n, stray_weight: stray });
    }
    Ok(())
}

/// Moments of `S` from a prebuilt `dΓ(O)`.
pub fn moments_with(
    d_gamma: &SecondQuantizedOperator,
    obs: &ObservableSpec,
    psi: &FockState,
    phi_t: &WaveFunction,
    n: usize,
    t: f64,
) -> Result<MomentReport> {
    if n == 0 {
        return Err(Error::TooFewParticles { needed: 1, found: 0 });
    }
    check_sector(psi, n)?;
    let shift = C64::new(-(n as f64) * obs.mean(phi_t)?, 0.0);
    let scale = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let s_apply = |x: &FockState| -> Result<FockState> {
        let y = d_gamma.apply(x)?;
        Ok(y.add_scaled(shift, x)?.scaled(scale))
    };
    let s1 = s_apply(psi)?;
    let s2 = s_apply(&s1)?;
    let mean = psi.inner(&s1)?.re;
    let variance = s1.norm_sqr();
    let fourth = s2.norm_sqr();
    let kurtosis = if variance > 1e-300 { Some(fourth / (variance * variance)) } else { None };
    Ok(MomentReport { n, t, mean, variance, fourth, kurtosis })
}

/// `E[S]`, `E[S²]`, `E[S⁴]` for `ψ` in sector `N`.
pub fn fluctuation_moments(psi: &FockState, obs: &ObservableSpec, phi_t: &WaveFunction, n: usize, t: f64) -> Result<MomentReport> {
    let op = second_quantize(obs, psi.basis())?;
    moments_with(&op, obs, psi, phi_t, n, t)
}

/// Chebyshev bound `(1/δ²N²) E[(Σ_j Õ^{(j)})²]` on the probability that the
/// empirical average deviates from `⟨φ_t, Oφ_t⟩` by more than `δ`.
pub fn lln_check(psi: &FockState, obs: &ObservableSpec, phi_t: &WaveFunction, n: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive"));
    }
    let m = fluctuation_moments(psi, obs, phi_t, n, 0.0)?;
    Ok(lln_bound(m.variance, n, delta))
}

/// `E[S²] / (δ² N)`.
pub fn lln_bound(variance: f64, n: usize, delta: f64) -> f64 {
    variance / (delta * delta * n as f64)
}

#[derive(Debug, Clone)]
pub struct CltSetup {
    pub phi0: WaveFunction,
    pub potential: PairPotential,
    pub observable: ObservableSpec,
    /// Must lie on the `dt` grid.
    pub times: Vec<f64>,
    pub particles: Vec<usize>,
    pub dt: f64,
    pub delta: f64,
    pub memory_budget: u64,
    pub krylov: KrylovOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltRow {
    pub moments: MomentReport,
    /// Limiting variance `σ_t²`.
    pub sigma2: f64,
    /// `⟨φ_t, O²φ_t⟩ - ⟨φ_t, Oφ_t⟩²`, the variance of `φ_t^{⊗N}`.
    pub classical: f64,
    /// `|E[S²] - σ_t²|`.
    pub residual: f64,
    pub lln_bound: f64,
}

impl CltRow {
    pub fn excess_kurtosis(&self) -> Option<f64> {
        self.moments.kurtosis.map(|k| k - 3.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltTable {
    pub rows: Vec<CltRow>,
    /// `(t, p)` with `residual ∝ N^p`, where all residuals are positive.
    pub residual_exponents: Vec<(f64, f64)>,
}

impl CltTable {
    /// First time `t*` at which `|σ² - classical| > 10 · residual` for the
    /// largest `N`: the limiting variance is not that of `φ_t^{⊗N}`.
    pub fn discriminator(&self) -> Option<f64> {
        let top = self.rows.iter().map(|r| r.moments.n).max()?;
        self.rows
            .iter()
            .filter(|r| r.moments.n == top && r.moments.t > 0.0)
            .find(|r| (r.sigma2 - r.classical).abs() > 10.0 * r.residual)
            .map(|r| r.moments.t)
    }

    pub fn rows_at(&self, t: f64) -> impl Iterator<Item = &CltRow> {
        self.rows.iter().filter(move |r| r.moments.t == t)
    }
}

impl CltSetup {
    pub fn feasibility(&self, n: usize) -> Result<u64> {
        let m = self.phi0.len();
        let bytes = sector_memory_estimate(m, n, self.krylov)
            .ok_or(Error::Infeasible { bytes: u64::MAX, budget: self.memory_budget })?;
        if bytes > self.memory_budget {
            return Err(Error::Infeasible { bytes, budget: self.memory_budget });
        }
        Ok(bytes)
    }

    /// Shape checks and the memory estimate for every `N`, before any
    /// allocation.
    pub fn validate(&self) -> Result<()> {
        if self.observable.sites() != self.phi0.len() {
            return Err(Error::DimensionMismatch { expected: self.phi0.len(), found: self.observable.sites() });
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParameter("delta must be positive"));
        }
        for &n in &self.particles {
            if n == 0 {
                return Err(Error::TooFewParticles { needed: 1, found: 0 });
            }
            self.feasibility(n)?;
        }
        Ok(())
    }

    pub fn trajectory(&self) -> Result<HartreeTrajectory> {
        let end = self.times.iter().copied().fold(0.0, f64::max);
        hartree_evolve(&self.phi0, &self.potential, end, self.dt)
    }

    /// `σ_t²` and the classical variance at every requested time.
    pub fn predictions(&self, traj: &HartreeTrajectory) -> Result<Vec<CltPrediction>> {
        let end = self.times.iter().copied().fold(0.0, f64::max);
        let path = theta_path(traj, &self.potential, end, 0.0)?;
        let mut out = Vec::with_capacity(self.times.len());
        for &t in &self.times {
            let index = traj.index_of(t)?;
            let phi_t = traj.state(index);
            out.push(CltPrediction {
                t,
                index,
                sigma2: sigma_t(&path[index], self.observable.matrix(), &self.phi0, phi_t)?,
                classical: classical_variance(self.observable.matrix(), phi_t)?,
            });
        }
        Ok(out)
    }
}

/// Limiting and classical variances at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltPrediction {
    pub t: f64,
    /// Grid index of `t` on the Hartree trajectory.
    pub index: usize,
    pub sigma2: f64,
    pub classical: f64,
}

/// Rows for one particle number, in the order of `predictions`.
pub fn clt_point<S: HamiltonianSource + ?Sized>(
    source: &S,
    setup: &CltSetup,
    traj: &HartreeTrajectory,
    predictions: &[CltPrediction],
    n: usize,
) -> Result<Vec<CltRow>> {
    let basis = Arc::new(FockBasis::sector(setup.phi0.len(), n)?);
    let h = source.hamiltonian(&setup.potential, n, &basis)?;
    let d_gamma = second_quantize(&setup.observable, &basis)?;
    let mut psi = product_state(&setup.phi0, n, &basis)?;
    let mut now = 0.0;
    let mut rows = Vec::with_capacity(predictions.len());
    for p in predictions {
        let grid_t = traj.time(p.index);
        psi = evolve(&h, &psi, grid_t - now, setup.krylov)?.0;
        now = grid_t;
        let moments = moments_with(&d_gamma, &setup.observable, &psi, traj.state(p.index), n, p.t)?;
        rows.push(CltRow {
            moments,
            sigma2: p.sigma2,
            classical: p.classical,
            residual: (moments.variance - p.sigma2).abs(),
            lln_bound: lln_bound(moments.variance, n, setup.delta),
        });
    }
    Ok(rows)
}

/// `(t, p)` fits of `residual ∝ N^p` at each time where all residuals
/// exceed [`NOISE_FLOOR`].
pub fn residual_exponents(times: &[f64], rows: &[CltRow]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &t in times {
        let (ns, rs): (Vec<f64>, Vec<f64>) =
            rows.iter().filter(|r| r.moments.t == t).map(|r| (r.moments.n as f64, r.residual)).unzip();
        if ns.len() >= 2 && rs.iter().all(|&r| r > NOISE_FLOOR) {
            if let Ok(f) = power_law_fit(&ns, &rs) {
                out.push((t, f.exponent));
            }
        }
    }
    out
}

/// Exact moments for product data against the Bogoliubov prediction, for
/// each `(N, t)`.
pub fn clt_study(setup: &CltSetup) -> Result<CltTable> {
    setup.validate()?;
    let traj = setup.trajectory()?;
    let predictions = setup.predictions(&traj)?;
    let mut rows = Vec::new();
    for &n in &setup.particles {
        rows.extend(clt_point(&Assemble, setup, &traj, &predictions, n)?);
    }
    let residual_exponents = residual_exponents(&setup.times, &rows);
    Ok(CltTable { rows, residual_exponents })
}
