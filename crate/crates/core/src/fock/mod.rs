//! Truncated bosonic Fock space over the lattice.
//!
//! A [`FockBasis`] holds every occupation vector with particle number in
//! `n_min..=n_max`; full bases (`n_min = 0`) carry the vacuum and all
//! operators that change particle number. Sector-only bases are used for
//! number-conserving evolution of product states.

mod basis;
mod fluctuation;
mod generator;
mod ops;
mod propagate;
mod state;
mod weyl;

pub use basis::{basis_dimension, sector_dimension, FockBasis};
pub use fluctuation::{fluctuation_dynamics, number_growth, FluctuationDynamics, GrowthSeries, MAX_DEFICIT};
pub use generator::{build_bt, build_dt, build_linfty_generator, build_ln_generator, fluctuation_phase_rate, FluctuationGenerator};
pub use ops::{
    annihilate, build_hamiltonian, create, Assemble, HamiltonianSource, field_pair, kinetic_matrix, number_op, one_body_operator,
    SecondQuantizedOperator, Symmetry,
};
pub(crate) use ops::{lower, raise};
pub use propagate::{evolve, evolve_generator, evolve_generator_batch, sector_weight_drift, StepOptions};
pub use state::FockState;
pub use weyl::{product_state, weyl, weyl_generator, weyl_required_cutoff, xi_vector, Displaced};
