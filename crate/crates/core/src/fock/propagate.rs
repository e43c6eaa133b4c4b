//! Time propagation on the truncated Fock space.

use super::generator::FluctuationGenerator;
use super::ops::{SecondQuantizedOperator, Symmetry};
use super::FockState;
use crate::error::{Error, Result};
use crate::hartree::HartreeTrajectory;
use crate::krylov::{expm_anti_hermitian, expm_hermitian, KrylovOptions, KrylovStats};

/// `e^{-itH} ψ` for Hermitian `H`, or `e^{tG} ψ` for a generator flagged
/// anti-Hermitian. Negative `t` runs backwards.
pub fn evolve(
    op: &SecondQuantizedOperator,
    psi: &FockState,
    t: f64,
    opts: KrylovOptions,
) -> Result<(FockState, KrylovStats)> {
    op.check_state(psi)?;
    if !t.is_finite() {
        return Err(Error::NonFinite("propagation time"));
    }
    let (amps, stats) = match op.symmetry() {
        Symmetry::Hermitian => expm_hermitian(op, psi.amplitudes(), t, opts)?,
        Symmetry::AntiHermitian => expm_anti_hermitian(op, psi.amplitudes(), t, opts)?,
        Symmetry::General => return Err(Error::NotHermitian),
    };
    Ok((psi.with_amplitudes(amps), stats))
}

/// Options for stepping a time-dependent generator along a Hartree grid.
#[derive(Debug, Clone, Copy)]
pub struct StepOptions {
    /// Hartree grid points per propagation step.
    pub stride: usize,
    pub krylov: KrylovOptions,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { stride: 1, krylov: KrylovOptions::default() }
    }
}

/// Propagates a batch of states with `i∂_t ψ = L(φ_t) ψ` from grid index
/// `from` to `to` (either direction) using the exponential midpoint rule:
/// each step of length `h = stride·dt` applies `e^{∓ihL(φ_mid)}`. Going
/// backwards replays the forward steps' inverses, so the two directions are
/// exact inverses of each other.
///
/// `observe(k, states)` is called at every visited grid index, including
/// `from`.
pub fn evolve_generator_batch<F>(
    generator: &FluctuationGenerator,
    traj: &HartreeTrajectory,
    states: &mut [FockState],
    from: usize,
    to: usize,
    opts: StepOptions,
    mut observe: F,
) -> Result<KrylovStats>
where
    F: FnMut(usize, &[FockState]),
{
    let stride = opts.stride;
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be positive"));
    }
    let end = traj.len() - 1;
    for &k in &[from, to] {
        if k > end {
            return Err(Error::TimeOutOfRange { t: traj.time(k), start: 0.0, end: traj.end_time() });
        }
    }
    if !from.abs_diff(to).is_multiple_of(stride) {
        return Err(Error::InvalidParameter("time span is not a multiple of the step"));
    }
    let h = stride as f64 * traj.dt();
    let mut stats = KrylovStats::default();
    let mut k = from;
    observe(k, states);
    while k != to {
        let (lo, sign) = if to > k { (k, 1.0) } else { (k - stride, -1.0) };
        let phi_mid = traj.at_half_step(2 * lo + stride);
        let l = generator.at(&phi_mid)?;
        for s in states.iter_mut() {
            let (next, st) = evolve(&l, s, sign * h, opts.krylov)?;
            *s = next;
            stats.absorb(st);
        }
        k = if sign > 0.0 { k + stride } else { k - stride };
        observe(k, states);
    }
    Ok(stats)
}

/// Single-state convenience wrapper around [`evolve_generator_batch`].
pub fn evolve_generator(
    generator: &FluctuationGenerator,
    traj: &HartreeTrajectory,
    psi: &FockState,
    from: usize,
    to: usize,
    opts: StepOptions,
) -> Result<(FockState, KrylovStats)> {
    let mut states = [psi.clone()];
    let stats = evolve_generator_batch(generator, traj, &mut states, from, to, opts, |_, _| {})?;
    let [out] = states;
    Ok((out, stats))
}

/// Largest change of any sector weight `‖P_n ψ‖²` between two states.
pub fn sector_weight_drift(before: &FockState, after: &FockState) -> f64 {
    before
        .sector_weights()
        .iter()
        .zip(after.sector_weights())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
