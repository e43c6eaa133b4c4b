mod common;

use std::sync::Arc;

use common::*;
use meanfield_core::fock::*;
use meanfield_core::krylov::KrylovOptions;
use meanfield_core::linalg::CMatrix;
use meanfield_core::reduced::*;
use meanfield_core::{Error, PairPotential, WaveFunction, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Partial traces of the symmetric tensor `Eψ` over all but the first
/// `k` slots, computed on `(C^M)^{⊗n}` directly.
fn tensor_density(psi: &FockState, n: usize, k: usize) -> DMatrix<C64> {
    let basis = psi.basis();
    let m = basis.sites();
    let r = basis.sector_range(n).unwrap();
    let e = symmetric_embedding(basis, n);
    let v = &e * nalgebra::DVector::from_iterator(r.len(), psi.amplitudes()[r].iter().copied());
    let head = m.pow(k as u32);
    let rest = m.pow((n - k) as u32);
    // Index digits run least-significant first, so slot 1 is `cfg % m`.
    let split = |a: usize, b: usize| -> usize {
        let mut idx = 0;
        let mut h = a;
        let mut digits = Vec::new();
        for _ in 0..k {
            digits.push(h % m);
            h /= m;
        }
        for (p, d) in digits.iter().enumerate() {
            idx += d * m.pow(p as u32);
        }
        idx + b * head
    };
    DMatrix::from_fn(head, head, |i, j| {
        // Composite reduced index is x·M + y; tensor slots are (x, y).
        let to_cfg = |c: usize| if k == 2 { (c / m) + (c % m) * m } else { c };
        (0..rest).map(|b| v[split(to_cfg(i), b)] * v[split(to_cfg(j), b)].conj()).sum()
    })
}

fn cmatrix_diff(a: &CMatrix, b: &DMatrix<C64>) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            d = d.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    d
}

#[test]
fn densities_match_first_quantized_partial_traces() {
    let mut r = rng(11);
    for &(m, n) in &[(3, 2), (3, 4), (4, 3), (2, 5)] {
        let basis = Arc::new(FockBasis::sector(m, n).unwrap());
        let psi = random_state(&mut r, &basis, n);
        let g1 = gamma1(&psi, n).unwrap();
        let g2 = gamma2(&psi, n).unwrap();
        assert!(cmatrix_diff(g1.matrix(), &tensor_density(&psi, n, 1)) < 1e-13, "M={m} N={n}");
        assert!(cmatrix_diff(g2.matrix(), &tensor_density(&psi, n, 2)) < 1e-13, "M={m} N={n}");
    }
}

#[test]
fn two_particle_state_matches_outer_product() {
    // ψ = (a†_0 a†_1 + 0.5i a†_2 a†_2) Ω, normalized.
    let basis = Arc::new(FockBasis::sector(4, 2).unwrap());
    let mut amps = vec![C64::new(0.0, 0.0); basis.len()];
    amps[basis.index(&[1, 1, 0, 0]).unwrap()] = C64::new(1.0, 0.0);
    amps[basis.index(&[0, 0, 2, 0]).unwrap()] = C64::new(0.0, 0.5);
    let psi = FockState::new(basis, amps).unwrap().normalized().unwrap();
    let norm = (1.0f64 + 0.25).sqrt();
    let pair = |x: usize, y: usize| x * 4 + y;
    let mut wave = vec![C64::new(0.0, 0.0); 16];
    wave[pair(0, 1)] = C64::new(1.0 / 2f64.sqrt() / norm, 0.0);
    wave[pair(1, 0)] = C64::new(1.0 / 2f64.sqrt() / norm, 0.0);
    wave[pair(2, 2)] = C64::new(0.0, 0.5 / norm);
    let want = CMatrix::outer(&wave, &wave);
    let got = gamma2(&psi, 2).unwrap();
    assert!((got.matrix() - &want).max_abs() < 1e-15);
}

#[test]
fn product_states_give_projectors() {
    let mut r = rng(3);
    let phi = random_wave(&mut r, 4, 1.0);
    for n in [1, 2, 5] {
        let basis = Arc::new(FockBasis::sector(4, n).unwrap());
        let psi = product_state(&phi, n, &basis).unwrap();
        let g1 = gamma1(&psi, n).unwrap();
        assert!(trace_distance(&g1, &DensityMatrix::pure(&phi, 1).unwrap()).unwrap() < 1e-13);
        if n >= 2 {
            let g2 = gamma2(&psi, n).unwrap();
            assert!(trace_distance(&g2, &DensityMatrix::pure(&phi, 2).unwrap()).unwrap() < 1e-13);
        }
    }
}

#[test]
fn coherent_state_density_follows_shift_identity() {
    let mut r = rng(5);
    let n = 3.0;
    let phi = random_wave(&mut r, 3, 1.0);
    let f = phi.scaled(C64::new(f64::sqrt(n), 0.0));
    let basis = Arc::new(FockBasis::new(3, 22).unwrap());
    let coh = weyl(&f, &FockState::vacuum(basis).unwrap()).unwrap().state;
    let raw = gamma1(&coh, 3);
    // The truncated coherent state has mean particle number ≈ N, trace ≈ 1.
    let g = raw.unwrap();
    for x in 0..3 {
        for y in 0..3 {
            let want = phi.as_slice()[x] * phi.as_slice()[y].conj();
            assert!((g.matrix()[(x, y)] - want).norm() < 1e-9);
        }
    }
}

#[test]
fn partial_trace_and_observable_consistency() {
    let mut r = rng(21);
    let (m, n) = (3, 5);
    let basis = Arc::new(FockBasis::sector(m, n).unwrap());
    let psi = random_state(&mut r, &basis, n);
    let g1 = gamma1(&psi, n).unwrap();
    let g2 = gamma2(&psi, n).unwrap();
    let reduced = g2.partial_trace().unwrap();
    assert!((reduced.matrix() - g1.matrix()).max_abs() < 1e-10);
    let o = CMatrix::from_fn(m, m, |i, j| {
        let z = C64::new((i + 2 * j) as f64 * 0.3, (i as f64 - j as f64) * 0.7);
        if i == j { C64::new(z.re, 0.0) } else { z }
    });
    let o = (&o + &o.adjoint()).scale(C64::new(0.5, 0.0));
    let o1 = CMatrix::from_fn(m * m, m * m, |p, q| if p % m == q % m { o[(p / m, q / m)] } else { C64::new(0.0, 0.0) });
    let lhs = g2.expectation(&o1).unwrap();
    let rhs = g1.expectation(&o).unwrap();
    assert!((lhs - rhs).norm() < 1e-10);
}

#[test]
fn gamma1_is_translation_covariant() {
    let mut r = rng(8);
    let (m, n) = (5, 3);
    let basis = Arc::new(FockBasis::sector(m, n).unwrap());
    let psi = random_state(&mut r, &basis, n);
    let shift = 2;
    let mut moved = vec![C64::new(0.0, 0.0); basis.len()];
    let mut occ = vec![0u8; m];
    for i in 0..basis.len() {
        let src = basis.occupation(i);
        for x in 0..m {
            occ[(x + shift) % m] = src[x];
        }
        moved[basis.index(&occ).unwrap()] = psi.amplitudes()[i];
    }
    let moved = FockState::new(basis.clone(), moved).unwrap();
    let g = gamma1(&psi, n).unwrap();
    let h = gamma1(&moved, n).unwrap();
    for x in 0..m {
        for y in 0..m {
            assert!((h.matrix()[((x + shift) % m, (y + shift) % m)] - g.matrix()[(x, y)]).norm() < 1e-14);
        }
    }
}

#[test]
fn too_few_particles_is_rejected() {
    let basis = Arc::new(FockBasis::sector(3, 1).unwrap());
    let psi = product_state(&WaveFunction::site(3, 0), 1, &basis).unwrap();
    assert!(matches!(gamma2(&psi, 1), Err(Error::TooFewParticles { .. })));
    assert!(gamma1(&psi, 0).is_err());
    let g = gamma1(&psi, 1).unwrap();
    assert!(trace_distance(&g, &DensityMatrix::pure(&WaveFunction::site(3, 0), 1).unwrap()).unwrap() < 1e-15);
}

fn random_density(r: &mut rand_chacha::ChaCha8Rng, m: usize) -> DensityMatrix {
    let vs: Vec<WaveFunction> = (0..3).map(|_| random_wave(r, m, 1.0)).collect();
    let w = [0.5, 0.3, 0.2];
    let mut acc = CMatrix::zeros(m, m);
    for (v, &p) in vs.iter().zip(&w) {
        acc = &acc + &CMatrix::outer(v.as_slice(), v.as_slice()).scale(C64::new(p, 0.0));
    }
    DensityMatrix::new(1, m, acc).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_a_metric(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let (a, b, c) = (random_density(&mut r, 4), random_density(&mut r, 4), random_density(&mut r, 4));
        let ab = trace_distance(&a, &b).unwrap();
        let ba = trace_distance(&b, &a).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        let cb = trace_distance(&c, &b).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab <= ac + cb + 1e-12);
        let svd: f64 = (to_dense(a.matrix()) - to_dense(b.matrix())).singular_values().iter().sum();
        prop_assert!((ab - svd).abs() < 1e-10);
    }
}

fn setup(potential: PairPotential, times: Vec<f64>, particles: Vec<usize>, data: InitialData) -> ConvergenceSetup {
    ConvergenceSetup {
        phi0: smooth_state(potential.sites()),
        potential,
        times,
        particles,
        data,
        cutoff: Cutoff::Auto,
        dt: 1e-3,
        gamma2: true,
        memory_budget: 1 << 30,
        krylov: KrylovOptions::default(),
    }
}

#[test]
fn free_evolution_factorizes() {
    let s = setup(PairPotential::zero(4), vec![0.0, 0.5], vec![2, 5], InitialData::Product);
    let table = convergence_study(&s).unwrap();
    assert_eq!(table.rows.len(), 4);
    for row in &table.rows {
        assert!(row.distance1 <= 1e-9, "{row:?}");
        assert!(row.distance2.unwrap() <= 1e-9, "{row:?}");
    }
}

#[test]
fn interacting_distances_shrink_like_inverse_n() {
    let (_, v) = interacting(4, 1.0);
    let s = setup(v, vec![0.0, 0.5], vec![2, 4, 8], InitialData::Product);
    let table = convergence_study(&s).unwrap();
    let at: Vec<f64> = table.rows.iter().filter(|r| r.t == 0.5).map(|r| r.distance1).collect();
    assert!(at.windows(2).all(|w| w[1] < w[0]), "{at:?}");
    for r in table.rows.iter().filter(|r| r.t == 0.0) {
        assert!(r.distance1 < 1e-12 && r.distance2.unwrap() < 1e-12);
    }
    let (_, p) = table.exponents.iter().copied().find(|&(t, _)| t == 0.5).unwrap();
    assert!((-1.35..=-0.65).contains(&p), "exponent {p}");
}

#[test]
fn coherent_data_converge() {
    let (_, v) = interacting(3, 1.0);
    let mut s = setup(v, vec![0.5], vec![2, 4, 8], InitialData::Coherent);
    s.gamma2 = false;
    let table = convergence_study(&s).unwrap();
    for r in &table.rows {
        assert!(r.deficit < 1e-8);
    }
    let d: Vec<f64> = table.rows.iter().map(|r| r.distance1).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn infeasible_sizes_fail_before_work() {
    let mut s = setup(PairPotential::zero(8), vec![1.0], vec![4, 60], InitialData::Coherent);
    s.memory_budget = 1 << 20;
    assert!(matches!(convergence_study(&s), Err(Error::Infeasible { .. })));
}
