//! Strang-split solver for `i∂_t φ = -Δφ + (V ⋆ |φ|²) φ`.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{convolve, dot, Dft, Lattice, PairPotential, WaveFunction};

/// Snapshots of a Hartree solution on a uniform time grid starting at 0.
#[derive(Debug, Clone)]
pub struct HartreeTrajectory {
    dt: f64,
    states: Vec<WaveFunction>,
    potential: PairPotential,
}

impl HartreeTrajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        (self.states.len() - 1) as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.states.len()).map(|k| self.time(k)).collect()
    }

    pub fn states(&self) -> &[WaveFunction] {
        &self.states
    }

    pub fn potential(&self) -> &PairPotential {
        &self.potential
    }

    pub fn state(&self, k: usize) -> &WaveFunction {
        &self.states[k]
    }

    /// Grid index of time `t`; `t` must sit on the grid up to roundoff.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt).round();
        let out = Error::TimeOutOfRange { t, start: 0.0, end: self.end_time() };
        if !(k >= 0.0) || (k * self.dt - t).abs() > 1e-9 * self.dt.max(t.abs()) {
            return Err(out);
        }
        let k = k as usize;
        if k >= self.states.len() {
            return Err(out);
        }
        Ok(k)
    }

    /// Stored snapshot at time `t`. No interpolation between grid points.
    pub fn at(&self, t: f64) -> Result<&WaveFunction> {
        Ok(&self.states[self.index_of(t)?])
    }

    /// State half a step after grid point `k`, advanced by one Strang
    /// half-step. Gives generators evaluated at step midpoints a third-order
    /// accurate Hartree state without storing a finer grid.
    pub fn midpoint(&self, k: usize) -> WaveFunction {
        let solver = HartreeSolver::new(&self.potential);
        solver.step(&self.states[k], 0.5 * self.dt)
    }

    /// State at time `half · dt/2`: a stored snapshot for even `half`, a
    /// midpoint for odd.
    pub fn at_half_step(&self, half: usize) -> WaveFunction {
        if half.is_multiple_of(2) {
            self.states[half / 2].clone()
        } else {
            self.midpoint(half / 2)
        }
    }
}

/// Reusable Strang stepper for one lattice size and potential.
#[derive(Debug, Clone)]
pub struct HartreeSolver {
    potential: PairPotential,
    lattice: Lattice,
    dft: Dft,
}

impl HartreeSolver {
    pub fn new(potential: &PairPotential) -> Self {
        let m = potential.sites();
        Self {
            potential: potential.clone(),
            lattice: Lattice::new(m).expect("potential validated at construction"),
            dft: Dft::new(m),
        }
    }

    fn nonlinear_phase(&self, phi: &mut [C64], dt: f64) {
        let rho: Vec<f64> = phi.iter().map(|a| a.norm_sqr()).collect();
        let mf = convolve(&self.potential, &rho).expect("lengths checked by caller");
        for (a, u) in phi.iter_mut().zip(mf) {
            *a *= C64::from_polar(1.0, -u * dt);
        }
    }

    /// One signed Strang step; negative `dt` runs the same scheme backwards.
    pub fn step(&self, phi: &WaveFunction, dt: f64) -> WaveFunction {
        let mut amps = phi.as_slice().to_vec();
        self.nonlinear_phase(&mut amps, 0.5 * dt);
        let mut modes = self.dft.forward(&amps);
        for (k, c) in modes.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, -self.lattice.kinetic_eigenvalue(k) * dt);
        }
        let mut amps = self.dft.inverse(&modes);
        self.nonlinear_phase(&mut amps, 0.5 * dt);
        WaveFunction::new(amps)
    }
}

fn check_sites(phi: &WaveFunction, v: &PairPotential) -> Result<()> {
    if phi.len() != v.sites() {
        return Err(Error::DimensionMismatch { expected: v.sites(), found: phi.len() });
    }
    Ok(())
}

/// One Strang step: half nonlinear phase, exact kinetic step in Fourier
/// space, half nonlinear phase from the updated density.
pub fn hartree_step(phi: &WaveFunction, v: &PairPotential, dt: f64) -> Result<WaveFunction> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    check_sites(phi, v)?;
    Ok(HartreeSolver::new(v).step(phi, dt))
}

/// Evolves a normalized state for `⌈T/dt⌉` steps of size `dt`.
pub fn hartree_evolve(
    phi0: &WaveFunction,
    v: &PairPotential,
    total: f64,
    dt: f64,
) -> Result<HartreeTrajectory> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    if !(total >= 0.0) {
        return Err(Error::NegativeTime(total));
    }
    check_sites(phi0, v)?;
    if !phi0.is_normalized() {
        return Err(Error::NotNormalized(phi0.norm()));
    }
    let steps = ((total / dt) - 1e-9).ceil().max(0.0) as usize;
    let solver = HartreeSolver::new(v);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(phi0.clone());
    for k in 0..steps {
        let next = solver.step(&states[k], dt);
        states.push(next);
    }
    Ok(HartreeTrajectory { dt, states, potential: v.clone() })
}

/// `E = ⟨φ, -Δφ⟩ + ½ Σ_{x,y} V(x-y) |φ(x)|² |φ(y)|²`.
pub fn hartree_energy(phi: &WaveFunction, v: &PairPotential) -> Result<f64> {
    check_sites(phi, v)?;
    let m = phi.len();
    let lattice = Lattice::new(m)?;
    let p = phi.as_slice();
    let kphi: Vec<C64> = (0..m)
        .map(|x| (0..m).map(|y| p[y] * lattice.kinetic(x, y)).sum())
        .collect();
    let kinetic = dot(p, &kphi).re;
    let rho = phi.density();
    let mf = convolve(v, &rho)?;
    let interaction: f64 = rho.iter().zip(&mf).map(|(r, u)| r * u).sum();
    Ok(kinetic + 0.5 * interaction)
}
