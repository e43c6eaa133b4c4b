#![allow(dead_code)]

use std::sync::Arc;

use meanfield_core::fock::{FockBasis, FockState};
use meanfield_core::{PairPotential, WaveFunction, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; good enough for test vectors.
    let u: f64 = rng.gen::<f64>().max(1e-300);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn random_wave(rng: &mut ChaCha8Rng, m: usize, norm: f64) -> WaveFunction {
    let w = WaveFunction::new((0..m).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect());
    w.normalized().unwrap().scaled(C64::new(norm, 0.0))
}

/// Normalized random state supported on sectors `0..=top`.
pub fn random_state(rng: &mut ChaCha8Rng, basis: &Arc<FockBasis>, top: usize) -> FockState {
    let end = basis.sector_range(top).unwrap().end;
    let amps = (0..basis.len())
        .map(|i| if i < end { C64::new(gaussian(rng), gaussian(rng)) } else { C64::new(0.0, 0.0) })
        .collect();
    FockState::new(basis.clone(), amps).unwrap().normalized().unwrap()
}

pub fn smooth_state(m: usize) -> WaveFunction {
    let amps = (0..m)
        .map(|x| {
            let s = 2.0 * std::f64::consts::PI * x as f64 / m as f64;
            C64::new((0.8 * s.cos()).exp(), 0.0)
        })
        .collect();
    WaveFunction::new(amps).normalized().unwrap()
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Symmetric `n`-particle basis vectors embedded in `(C^M)^{⊗n}`.
pub fn symmetric_embedding(basis: &FockBasis, n: usize) -> DMatrix<C64> {
    let m = basis.sites();
    let dim = m.pow(n as u32);
    let range = basis.sector_range(n).unwrap();
    let mut e = DMatrix::zeros(dim, range.len());
    for cfg in 0..dim {
        let mut occ = vec![0u8; m];
        let mut c = cfg;
        for _ in 0..n {
            occ[c % m] += 1;
            c /= m;
        }
        let col = basis.index(&occ).unwrap() - range.start;
        let fact = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
        let weight = occ.iter().map(|&k| fact(k as usize)).product::<f64>() / fact(n);
        e[(cfg, col)] = C64::new(weight.sqrt(), 0.0);
    }
    e
}


/// Gaussian pair potential `g·exp(-d²/2)` and the smooth initial state used
/// by the interacting studies.
pub fn interacting(m: usize, g: f64) -> (WaveFunction, PairPotential) {
    (smooth_state(m), PairPotential::gaussian(m, g, 1.0).unwrap())
}

pub fn to_dense(a: &meanfield_core::linalg::CMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}
