//! Limiting Bogoliubov dynamics on the doubled one-particle space.
//!
//! A map θ is stored through its blocks `(U, V)`; the full matrix is
//! `[[U, V̄], [V, Ū]]`, acting on pairs `(f, g)` as
//! `θ(f, g) = (Uf + V̄g, Vf + Ūg)`. Conjugation `J` is entrywise.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{
    build_bt, build_dt, evolve_generator_batch, lower, raise, FluctuationGenerator, FockBasis, FockState,
    StepOptions,
};
use crate::hartree::HartreeTrajectory;
use crate::lattice::{dot, PairPotential, WaveFunction};
use crate::linalg::CMatrix;

/// Tolerance used by [`BogoliubovMap::check`].
pub const IDENTITY_TOL: f64 = 1e-8;

/// Element `(f, g)` of the doubled one-particle space.
#[derive(Debug, Clone, PartialEq)]
pub struct PairVector {
    pub f: Vec<C64>,
    pub g: Vec<C64>,
}

impl PairVector {
    pub fn new(f: Vec<C64>, g: Vec<C64>) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::DimensionMismatch { expected: f.len(), found: g.len() });
        }
        if f.iter().chain(&g).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("pair vector"));
        }
        Ok(Self { f, g })
    }

    /// `(φ, φ̄)`.
    pub fn real_pair(phi: &[C64]) -> Self {
        Self { f: phi.to_vec(), g: phi.iter().map(|z| z.conj()).collect() }
    }

    pub fn sites(&self) -> usize {
        self.f.len()
    }

    /// `⟨a, b⟩ = ⟨f_a, f_b⟩ + ⟨g_a, g_b⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        dot(&self.f, &other.f) + dot(&self.g, &other.g)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).re
    }

    /// `(ḡ, f̄)`.
    pub fn conj_swap(&self) -> Self {
        Self { f: self.g.iter().map(|z| z.conj()).collect(), g: self.f.iter().map(|z| z.conj()).collect() }
    }

    /// `f` followed by `g`.
    pub fn stacked(&self) -> Vec<C64> {
        self.f.iter().chain(&self.g).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMap {
    u: CMatrix,
    v: CMatrix,
    t: f64,
    s: f64,
}

impl BogoliubovMap {
    pub fn identity(sites: usize, s: f64) -> Self {
        Self { u: CMatrix::identity(sites), v: CMatrix::zeros(sites, sites), t: s, s }
    }

    /// Builds from blocks without checking the identities; see [`check`].
    ///
    /// [`check`]: BogoliubovMap::check
    pub fn from_blocks(u: CMatrix, v: CMatrix, t: f64, s: f64) -> Result<Self> {
        let m = u.rows();
        for b in [&u, &v] {
            if b.rows() != m || b.cols() != m {
                return Err(Error::DimensionMismatch { expected: m, found: b.cols() });
            }
        }
        Ok(Self { u, v, t, s })
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// Final time.
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Initial time.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn sites(&self) -> usize {
        self.u.rows()
    }

    /// `(max|U†U - V†V - 1|, max|U†V̄ - V†Ū|)`.
    pub fn identity_deviation(&self) -> (f64, f64) {
        let ua = self.u.adjoint();
        let va = self.v.adjoint();
        let m = self.sites();
        let first = &(&(&ua * &self.u) - &(&va * &self.v)) - &CMatrix::identity(m);
        let second = &(&ua * &self.v.conj()) - &(&va * &self.u.conj());
        (first.max_abs(), second.max_abs())
    }

    pub fn check(&self) -> Result<()> {
        let (a, b) = self.identity_deviation();
        if !(a <= IDENTITY_TOL) {
            return Err(Error::BogoliubovInvariant { what: "U†U - V†V != 1", value: a });
        }
        if !(b <= IDENTITY_TOL) {
            return Err(Error::BogoliubovInvariant { what: "U†V̄ - V†Ū != 0", value: b });
        }
        Ok(())
    }

    /// Hilbert–Schmidt norm of the `V` block.
    pub fn hilbert_schmidt_v(&self) -> f64 {
        self.v.frobenius()
    }

    /// The `2M × 2M` matrix `[[U, V̄], [V, Ū]]`.
    pub fn full_matrix(&self) -> CMatrix {
        let m = self.sites();
        let mut out = CMatrix::zeros(2 * m, 2 * m);
        out.set_block(0, 0, &self.u);
        out.set_block(0, m, &self.v.conj());
        out.set_block(m, 0, &self.v);
        out.set_block(m, m, &self.u.conj());
        out
    }

    pub fn apply(&self, p: &PairVector) -> Result<PairVector> {
        if p.sites() != self.sites() {
            return Err(Error::DimensionMismatch { expected: self.sites(), found: p.sites() });
        }
        let (uf, vbg) = (self.u.mul_vec(&p.f), self.v.conj().mul_vec(&p.g));
        let (vf, ubg) = (self.v.mul_vec(&p.f), self.u.conj().mul_vec(&p.g));
        Ok(PairVector {
            f: uf.iter().zip(&vbg).map(|(a, b)| a + b).collect(),
            g: vf.iter().zip(&ubg).map(|(a, b)| a + b).collect(),
        })
    }

    /// Symplectic inverse: `U ↦ U†`, `V ↦ -Vᵀ`, times swapped.
    pub fn inverse(&self) -> Self {
        Self { u: self.u.adjoint(), v: self.v.transpose().scale(C64::new(-1.0, 0.0)), t: self.s, s: self.t }
    }

    /// `self ∘ other`, i.e. `θ(t; r) θ(r; s)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.sites() != self.sites() {
            return Err(Error::DimensionMismatch { expected: self.sites(), found: other.sites() });
        }
        let u = &(&self.u * &other.u) + &(&self.v.conj() * &other.v);
        let v = &(&self.v * &other.u) + &(&self.u.conj() * &other.v);
        Ok(Self { u, v, t: self.t, s: other.s })
    }
}

/// Right-hand side `-i [[D, -B̄], [B, -D̄]] (U; V)` for the column block.
fn rhs(d: &CMatrix, b: &CMatrix, u: &CMatrix, v: &CMatrix) -> (CMatrix, CMatrix) {
    let mi = C64::new(0.0, -1.0);
    let du = &(d * u) - &(&b.conj() * v);
    let dv = &(b * u) - &(&d.conj() * v);
    (du.scale(mi), dv.scale(mi))
}

fn generator_blocks(phi: &WaveFunction, v: &PairPotential) -> Result<(CMatrix, CMatrix)> {
    Ok((build_dt(phi, v)?, build_bt(phi, v)?))
}

fn axpy(a: &CMatrix, h: f64, k: &CMatrix) -> CMatrix {
    a + &k.scale(C64::new(h, 0.0))
}

/// θ(t_k; s) at every grid index `k` from `index(s)` to `index(t)`
/// (either direction), by classical RK4 on the Hartree grid. The generator
/// at the step midpoint uses the Strang midpoint state of the trajectory.
pub fn theta_path(traj: &HartreeTrajectory, v: &PairPotential, t: f64, s: f64) -> Result<Vec<BogoliubovMap>> {
    let from = traj.index_of(s)?;
    let to = traj.index_of(t)?;
    let m = traj.state(0).len();
    if v.sites() != m {
        return Err(Error::DimensionMismatch { expected: m, found: v.sites() });
    }
    let mut u = CMatrix::identity(m);
    let mut vb = CMatrix::zeros(m, m);
    let mut path = Vec::with_capacity(from.abs_diff(to) + 1);
    path.push(BogoliubovMap { u: u.clone(), v: vb.clone(), t: traj.time(from), s: traj.time(from) });
    let mut k = from;
    let mut here = generator_blocks(traj.state(k), v)?;
    while k != to {
        let (lo, next, h) = if to > k { (k, k + 1, traj.dt()) } else { (k - 1, k - 1, -traj.dt()) };
        let mid = generator_blocks(&traj.at_half_step(2 * lo + 1), v)?;
        let there = generator_blocks(traj.state(next), v)?;
        let (k1u, k1v) = rhs(&here.0, &here.1, &u, &vb);
        let (k2u, k2v) = rhs(&mid.0, &mid.1, &axpy(&u, h / 2.0, &k1u), &axpy(&vb, h / 2.0, &k1v));
        let (k3u, k3v) = rhs(&mid.0, &mid.1, &axpy(&u, h / 2.0, &k2u), &axpy(&vb, h / 2.0, &k2v));
        let (k4u, k4v) = rhs(&there.0, &there.1, &axpy(&u, h, &k3u), &axpy(&vb, h, &k3v));
        let w = C64::new(h / 6.0, 0.0);
        u = &u + &(&(&k1u + &k4u) + &(&k2u + &k3u).scale(C64::new(2.0, 0.0))).scale(w);
        vb = &vb + &(&(&k1v + &k4v) + &(&k2v + &k3v).scale(C64::new(2.0, 0.0))).scale(w);
        k = next;
        here = there;
        path.push(BogoliubovMap { u: u.clone(), v: vb.clone(), t: traj.time(k), s: traj.time(from) });
    }
    Ok(path)
}

/// θ(t; s) solving `i∂_t θ = [[D_t, -B̄_t], [B_t, -D̄_t]] θ`, `θ(s; s) = 1`.
pub fn theta_evolve(traj: &HartreeTrajectory, v: &PairPotential, t: f64, s: f64) -> Result<BogoliubovMap> {
    Ok(theta_path(traj, v, t, s)?.pop().expect("path holds the initial map"))
}

/// Largest deviation of either identity along a path.
pub fn path_identity_deviation(path: &[BogoliubovMap]) -> f64 {
    path.iter().map(|m| {
        let (a, b) = m.identity_deviation();
        a.max(b)
    }).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtuReport {
    pub samples: usize,
    /// `max ‖U*A(f,g)Uψ - A(θ⁻¹(f,g))ψ‖ / ‖A(θ⁻¹(f,g))ψ‖`.
    pub max_relative_deviation: f64,
    /// Largest top-sector weight met during propagation.
    pub deficit: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BtuOptions {
    pub n_max: usize,
    pub samples: usize,
    /// Highest sector in which test states carry weight.
    pub test_sector: usize,
    pub seed: u64,
    /// Sectors `0..=compare_up_to` enter the comparison; `None` compares
    /// the whole truncated space.
    pub compare_up_to: Option<usize>,
    pub step: StepOptions,
}

impl Default for BtuOptions {
    fn default() -> Self {
        Self { n_max: 12, samples: 20, test_sector: 1, seed: 0, compare_up_to: None, step: StepOptions::default() }
    }
}

fn gaussian_c64(rng: &mut ChaCha8Rng) -> C64 {
    let mut normal = || {
        let u: f64 = rng.gen::<f64>().max(1e-300);
        let v: f64 = rng.gen();
        (-2.0 * u.ln()).sqrt() * (2.0 * core::f64::consts::PI * v).cos()
    };
    C64::new(normal(), normal())
}

fn field(p: &PairVector, psi: &FockState) -> FockState {
    // A(f, g) = a†(f) + a(ḡ); `lower` conjugates its argument.
    let conj_g: Vec<C64> = p.g.iter().map(|z| z.conj()).collect();
    let up = raise(&p.f, psi);
    let down = lower(&conj_g, psi);
    up.add_scaled(C64::new(1.0, 0.0), &down).expect("same basis")
}

/// Compares `U_∞(t;s)* A(f,g) U_∞(t;s) ψ` with `A(θ(t;s)⁻¹(f,g)) ψ` for
/// randomly sampled pairs and low-sector states. `U_∞` is built by
/// time-ordered propagation with `L_∞` on a truncated Fock space.
pub fn check_btu(
    theta: &BogoliubovMap,
    traj: &HartreeTrajectory,
    v: &PairPotential,
    opts: BtuOptions,
) -> Result<BtuReport> {
    let m = theta.sites();
    if opts.test_sector + 1 >= opts.n_max {
        return Err(Error::InvalidParameter("test sector must lie well below the cutoff"));
    }
    let from = traj.index_of(theta.s())?;
    let to = traj.index_of(theta.t())?;
    let basis = Arc::new(FockBasis::new(m, opts.n_max)?);
    let generator = FluctuationGenerator::new(&basis, v, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let low_end = basis.sector_range(opts.test_sector)?.end;
    let mut pairs = Vec::with_capacity(opts.samples);
    let mut states = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        let f = (0..m).map(|_| gaussian_c64(&mut rng)).collect();
        let g = (0..m).map(|_| gaussian_c64(&mut rng)).collect();
        pairs.push(PairVector::new(f, g)?);
        let amps = (0..basis.len())
            .map(|i| if i < low_end { gaussian_c64(&mut rng) } else { C64::new(0.0, 0.0) })
            .collect();
        states.push(FockState::new(basis.clone(), amps)?.normalized()?);
    }
    let originals = states.clone();
    let mut deficit: f64 = 0.0;
    let mut track = |_: usize, s: &[FockState]| {
        for x in s {
            deficit = deficit.max(x.top_sector_weight());
        }
    };
    evolve_generator_batch(&generator, traj, &mut states, from, to, opts.step, &mut track)?;
    for (s, p) in states.iter_mut().zip(&pairs) {
        *s = field(p, s);
    }
    evolve_generator_batch(&generator, traj, &mut states, to, from, opts.step, &mut track)?;
    let inv = theta.inverse();
    let mut worst: f64 = 0.0;
    for ((lhs, p), psi) in states.iter().zip(&pairs).zip(&originals) {
        let mut rhs = field(&inv.apply(p)?, psi);
        let mut lhs = lhs.clone();
        if let Some(top) = opts.compare_up_to {
            lhs = lhs.project_up_to(top);
            rhs = rhs.project_up_to(top);
        }
        let diff = lhs.sub(&rhs)?.norm();
        worst = worst.max(diff / rhs.norm().max(1e-300));
    }
    Ok(BtuReport { samples: opts.samples, max_relative_deviation: worst, deficit })
}

/// Limiting CLT variance
/// `σ_t² = ½ (‖θ⁻¹h‖² - |⟨θ⁻¹h, (φ_0, φ̄_0)/√2⟩|²)`, `h = (Oφ_t, conj(Oφ_t))`,
/// for `θ = θ(t; 0)`.
pub fn sigma_t(theta: &BogoliubovMap, o: &CMatrix, phi0: &WaveFunction, phi_t: &WaveFunction) -> Result<f64> {
    let m = theta.sites();
    for w in [phi0, phi_t] {
        if w.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: w.len() });
        }
    }
    if o.rows() != m || o.cols() != m {
        return Err(Error::DimensionMismatch { expected: m, found: o.rows() });
    }
    let dev = o.hermitian_deviation();
    if dev > 1e-12 {
        return Err(Error::ObservableNotHermitian(dev));
    }
    let h = PairVector::real_pair(&o.mul_vec(phi_t.as_slice()));
    let w = theta.inverse().apply(&h)?;
    let r = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let p0 = PairVector::real_pair(&phi0.as_slice().iter().map(|z| z * r).collect::<Vec<_>>());
    Ok(0.5 * (w.norm_sqr() - w.inner(&p0).norm_sqr()))
}

/// Classical variance `⟨φ, O²φ⟩ - ⟨φ, Oφ⟩²`.
pub fn classical_variance(o: &CMatrix, phi: &WaveFunction) -> Result<f64> {
    if o.rows() != phi.len() {
        return Err(Error::DimensionMismatch { expected: o.rows(), found: phi.len() });
    }
    let op = o.mul_vec(phi.as_slice());
    let mean = dot(phi.as_slice(), &op).re;
    Ok(dot(&op, &op).re - mean * mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hartree::hartree_evolve;
    use alloc::vec;

    fn phi(m: usize) -> WaveFunction {
        let a = (0..m).map(|x| C64::new(1.0 + 0.3 * x as f64, 0.2 * (x as f64).sin())).collect();
        WaveFunction::new(a).normalized().unwrap()
    }

    #[test]
    fn identity_map_and_zero_span() {
        let v = PairPotential::gaussian(4, 1.0, 1.0).unwrap();
        let traj = hartree_evolve(&phi(4), &v, 0.1, 1e-2).unwrap();
        let th = theta_evolve(&traj, &v, 0.05, 0.05).unwrap();
        assert_eq!(th.u(), &CMatrix::identity(4));
        assert_eq!(th.v().max_abs(), 0.0);
        th.check().unwrap();
    }

    #[test]
    fn full_matrix_commutes_with_conjugation_swap() {
        let v = PairPotential::gaussian(3, 1.0, 1.0).unwrap();
        let traj = hartree_evolve(&phi(3), &v, 0.3, 1e-2).unwrap();
        let th = theta_evolve(&traj, &v, 0.3, 0.0).unwrap();
        let p = PairVector::new(
            vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0), C64::new(0.5, 0.5)],
            vec![C64::new(-1.0, 0.0), C64::new(0.3, 0.1), C64::new(0.0, 2.0)],
        )
        .unwrap();
        let a = th.apply(&p.conj_swap()).unwrap();
        let b = th.apply(&p).unwrap().conj_swap();
        for (x, y) in a.stacked().iter().zip(b.stacked()) {
            assert_eq!(*x, y);
        }
        let full = th.full_matrix();
        let direct = full.mul_vec(&p.stacked());
        let via = th.apply(&p).unwrap().stacked();
        for (x, y) in direct.iter().zip(&via) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn inverse_undoes_the_map() {
        let v = PairPotential::gaussian(4, 2.0, 1.0).unwrap();
        let traj = hartree_evolve(&phi(4), &v, 1.0, 1e-3).unwrap();
        let th = theta_evolve(&traj, &v, 1.0, 0.0).unwrap();
        th.check().unwrap();
        let id = th.inverse().compose(&th).unwrap();
        assert!((id.u() - &CMatrix::identity(4)).max_abs() < 1e-10);
        assert!(id.v().max_abs() < 1e-10);
        assert!(th.hilbert_schmidt_v() > 0.0);
    }

    #[test]
    fn sigma_rejects_non_hermitian_observable() {
        let th = BogoliubovMap::identity(2, 0.0);
        let o = CMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        let p = phi(2);
        assert!(matches!(sigma_t(&th, &o, &p, &p), Err(Error::ObservableNotHermitian(_))));
    }
}
