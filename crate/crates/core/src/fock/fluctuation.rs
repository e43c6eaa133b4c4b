//! The fluctuation dynamics `U(t;0) = W*(√N φ_t) e^{-iH_N t} W(√N φ_0)`.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::generator::FluctuationGenerator;
use super::ops::{build_hamiltonian, SecondQuantizedOperator};
use super::propagate::{evolve, evolve_generator_batch, StepOptions};
use super::weyl::{displace, weyl, Displaced};
use super::{FockBasis, FockState};
use crate::error::{Error, Result};
use crate::hartree::HartreeTrajectory;
use crate::krylov::KrylovOptions;
use crate::lattice::PairPotential;

/// Truncation deficit above which a fluctuation-dynamics result is rejected.
pub const MAX_DEFICIT: f64 = 1e-8;

/// Fluctuation dynamics for a fixed basis, potential and `N`, with the
/// Hamiltonian assembled once.
#[derive(Debug, Clone)]
pub struct FluctuationDynamics {
    hamiltonian: SecondQuantizedOperator,
    particles: usize,
}

impl FluctuationDynamics {
    pub fn new(basis: &Arc<FockBasis>, v: &PairPotential, n: usize) -> Result<Self> {
        if !basis.is_full() {
            return Err(Error::NotFullFock);
        }
        Ok(Self { hamiltonian: build_hamiltonian(v, n, basis)?, particles: n })
    }

    pub fn hamiltonian(&self) -> &SecondQuantizedOperator {
        &self.hamiltonian
    }

    /// `U(t;0) ψ` with `t` on the trajectory grid.
    ///
    /// The initial displacement is checked by the tail-safety rule; the
    /// final one moves a state with about `N` particles back towards the
    /// vacuum and is checked afterwards through its truncation deficit.
    pub fn apply(&self, traj: &HartreeTrajectory, psi: &FockState, t: f64, opts: KrylovOptions) -> Result<Displaced> {
        let k = traj.index_of(t)?;
        if k == 0 {
            return Ok(Displaced { state: psi.clone(), deficit: 0.0 });
        }
        let root_n = C64::new((self.particles as f64).sqrt(), 0.0);
        let up = weyl(&traj.state(0).scaled(root_n), psi)?;
        let (moved, _) = evolve(&self.hamiltonian, &up.state, traj.time(k), opts)?;
        let mid_deficit = moved.top_sector_weight();
        let down = displace(&traj.state(k).scaled(-root_n), &moved, opts)?;
        let deficit = up.deficit.max(mid_deficit).max(down.deficit);
        if deficit > MAX_DEFICIT {
            return Err(Error::Truncation { weight: deficit, n_max: psi.basis().n_max() });
        }
        Ok(Displaced { state: down.state, deficit })
    }
}

/// `U(t;0) ψ`, assembling `H_N` on the state's basis.
pub fn fluctuation_dynamics(
    traj: &HartreeTrajectory,
    v: &PairPotential,
    n: usize,
    psi: &FockState,
    t: f64,
) -> Result<Displaced> {
    FluctuationDynamics::new(psi.basis(), v, n)?.apply(traj, psi, t, KrylovOptions::default())
}

/// `⟨Ω, U*(t;0) (𝒩+1) U(t;0) Ω⟩` sampled along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest top-sector weight seen along the way.
    pub deficit: f64,
    /// `U(T;0)Ω` at the last recorded time.
    pub final_state: FockState,
}

/// Evolves the vacuum with `L_N(t)` by midpoint steps and records
/// `⟨𝒩+1⟩`. The scalar phase separating `L_N` from the Weyl-conjugated
/// Hamiltonian does not affect expectations, so it is dropped.
pub fn number_growth(
    generator: &FluctuationGenerator,
    traj: &HartreeTrajectory,
    opts: StepOptions,
) -> Result<GrowthSeries> {
    let steps = (traj.len() - 1) / opts.stride;
    let (mut times, mut values, mut deficit) = (Vec::new(), Vec::new(), 0.0f64);
    let mut states = [FockState::vacuum(generator.basis().clone())?];
    evolve_generator_batch(generator, traj, &mut states, 0, steps * opts.stride, opts, |k, s| {
        times.push(traj.time(k));
        values.push(s[0].mean_particles() + s[0].norm_sqr());
        deficit = deficit.max(s[0].top_sector_weight());
    })?;
    let [final_state] = states;
    Ok(GrowthSeries { times, values, deficit, final_state })
}
