//! Weyl operators, coherent and product states.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec;

use num_complex::Complex64 as C64;

use super::ops::{weyl_generator_matrix, SecondQuantizedOperator, Symmetry};
use super::propagate::evolve;
use super::{FockBasis, FockState};
use crate::error::{Error, Result};
use crate::krylov::KrylovOptions;
use crate::lattice::WaveFunction;

/// Result of a Weyl displacement on the truncated space.
#[derive(Debug, Clone)]
pub struct Displaced {
    pub state: FockState,
    /// Weight that reached the top stored sector. The truncated exponential
    /// is exactly unitary, so this is the visible trace of truncation.
    pub deficit: f64,
}

/// `a†(f) - a(f)` as an anti-Hermitian operator.
pub fn weyl_generator(f: &WaveFunction, basis: &Arc<FockBasis>) -> Result<SecondQuantizedOperator> {
    if f.len() != basis.sites() {
        return Err(Error::DimensionMismatch { expected: basis.sites(), found: f.len() });
    }
    if !basis.is_full() {
        return Err(Error::NotFullFock);
    }
    let matrix = weyl_generator_matrix(f.as_slice(), basis);
    Ok(SecondQuantizedOperator::trusted(basis.clone(), matrix, Symmetry::AntiHermitian, false))
}

/// Smallest cutoff the tail-safety rule accepts for displacing a state
/// occupied up to sector `n_occ` by `f` with `‖f‖ = norm`.
pub fn weyl_required_cutoff(norm: f64, n_occ: usize) -> usize {
    let r = norm + (n_occ as f64).sqrt();
    (r * r + 4.0 * r).ceil() as usize
}

/// `W(f) ψ` without the tail-safety precondition.
pub(crate) fn displace(f: &WaveFunction, psi: &FockState, opts: KrylovOptions) -> Result<Displaced> {
    let g = weyl_generator(f, psi.basis())?;
    let (state, _) = evolve(&g, psi, 1.0, opts)?;
    let deficit = state.top_sector_weight();
    Ok(Displaced { state, deficit })
}

/// `W(f) ψ = e^{a†(f) - a(f)} ψ`.
///
/// Requires `(‖f‖ + √n)² + 4(‖f‖ + √n) ≤ N_max`, where `n` is the highest
/// sector `ψ` occupies: the displaced state then has negligible weight
/// near the cutoff.
pub fn weyl(f: &WaveFunction, psi: &FockState) -> Result<Displaced> {
    if f.norm() == 0.0 {
        return Ok(Displaced { state: psi.clone(), deficit: psi.top_sector_weight() });
    }
    let n_occ = psi.max_occupied_sector(1e-14).unwrap_or(0);
    let required = weyl_required_cutoff(f.norm(), n_occ);
    if required > psi.basis().n_max() {
        return Err(Error::TailUnsafe { required, n_max: psi.basis().n_max() });
    }
    displace(f, psi, KrylovOptions::default())
}

/// `φ^{⊗n}` in sector `n`, i.e. `(a†(φ))ⁿ Ω / √(n!)`.
///
/// Amplitudes are evaluated in closed form,
/// `√(n! / Π n_x!) · Π φ(x)^{n_x}`, so sector-only bases work too.
pub fn product_state(phi: &WaveFunction, n: usize, basis: &Arc<FockBasis>) -> Result<FockState> {
    if phi.len() != basis.sites() {
        return Err(Error::DimensionMismatch { expected: basis.sites(), found: phi.len() });
    }
    if !phi.is_normalized() {
        return Err(Error::NotNormalized(phi.norm()));
    }
    let range = basis.sector_range(n)?;
    let mut log_fact = vec![0.0f64; n + 1];
    for k in 1..=n {
        log_fact[k] = log_fact[k - 1] + (k as f64).ln();
    }
    let mut out = FockState::zeros(basis.clone());
    for i in range {
        let occ = basis.occupation(i);
        let log_multinomial = log_fact[n] - occ.iter().map(|&k| log_fact[k as usize]).sum::<f64>();
        let mut amp = C64::new((0.5 * log_multinomial).exp(), 0.0);
        for (x, &k) in occ.iter().enumerate() {
            amp *= phi[x].powu(k as u32);
        }
        out.amplitudes_mut()[i] = amp;
    }
    Ok(out)
}

/// `ξ = d_N W*(√N φ) φ^{⊗N}` together with `d_N = ‖P_N W(√N φ) Ω‖⁻¹`.
pub fn xi_vector(phi: &WaveFunction, n: usize, basis: &Arc<FockBasis>) -> Result<(FockState, f64)> {
    let root_n = C64::new((n as f64).sqrt(), 0.0);
    let shift = phi.scaled(root_n);
    let coherent = weyl(&shift, &FockState::vacuum(basis.clone())?)?;
    let d_n = 1.0 / coherent.state.sector_weight(n).sqrt();
    let product = product_state(phi, n, basis)?;
    let back = weyl(&shift.scaled(C64::new(-1.0, 0.0)), &product)?;
    Ok((back.state.scaled(C64::new(d_n, 0.0)), d_n))
}
