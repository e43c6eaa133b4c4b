mod common;

use std::sync::Arc;

use common::*;
use meanfield_core::bogoliubov::classical_variance;
use meanfield_core::fock::{build_hamiltonian, evolve, product_state, FockBasis};
use meanfield_core::hartree::hartree_evolve;
use meanfield_core::krylov::KrylovOptions;
use meanfield_core::linalg::CMatrix;
use meanfield_core::reduced::{gamma1, gamma2};
use meanfield_core::statistics::*;
use meanfield_core::{PairPotential, C64};
use proptest::prelude::*;

fn setup(potential: PairPotential, times: Vec<f64>, particles: Vec<usize>) -> CltSetup {
    let m = potential.sites();
    CltSetup {
        phi0: smooth_state(m),
        potential,
        observable: ObservableSpec::cosine(m),
        times,
        particles,
        dt: 1e-3,
        delta: 0.1,
        memory_budget: 1 << 30,
        krylov: KrylovOptions::default(),
    }
}

#[test]
fn product_data_at_time_zero_is_iid() {
    let mut r = rng(2);
    let phi = random_wave(&mut r, 4, 1.0);
    let o = ObservableSpec::hopping(4);
    let var = classical_variance(o.matrix(), &phi).unwrap();
    let mut excess = Vec::new();
    for n in [2, 4, 8] {
        let basis = Arc::new(FockBasis::sector(4, n).unwrap());
        let psi = product_state(&phi, n, &basis).unwrap();
        let m = fluctuation_moments(&psi, &o, &phi, n, 0.0).unwrap();
        assert!(m.mean.abs() < 1e-12);
        assert!((m.variance - var).abs() < 1e-12);
        let bound = lln_check(&psi, &o, &phi, n, 0.2).unwrap();
        assert!((bound - var / (0.04 * n as f64)).abs() < 1e-12);
        excess.push((m.kurtosis.unwrap() - 3.0).abs());
    }
    assert!(excess.windows(2).all(|w| w[1] < w[0]), "{excess:?}");
}

#[test]
fn identity_observable_has_no_fluctuations() {
    let (phi0, v) = interacting(4, 1.0);
    let basis = Arc::new(FockBasis::sector(4, 5).unwrap());
    let h = build_hamiltonian(&v, 5, &basis).unwrap();
    let psi = evolve(&h, &product_state(&phi0, 5, &basis).unwrap(), 0.4, KrylovOptions::default()).unwrap().0;
    let one = ObservableSpec::new("one", CMatrix::identity(4)).unwrap();
    let m = fluctuation_moments(&psi, &one, &phi0, 5, 0.4).unwrap();
    assert!(m.mean.abs() < 1e-12 && m.variance < 1e-24 && m.fourth < 1e-40);
    assert_eq!(m.kurtosis, None);
    assert!(lln_check(&psi, &one, &phi0, 5, 0.1).unwrap() < 1e-20);
}

#[test]
fn variance_matches_reduced_density_expansion() {
    let (phi0, v) = interacting(4, 1.0);
    let n = 6;
    let basis = Arc::new(FockBasis::sector(4, n).unwrap());
    let h = build_hamiltonian(&v, n, &basis).unwrap();
    let traj = hartree_evolve(&phi0, &v, 0.5, 1e-3).unwrap();
    let psi = evolve(&h, &product_state(&phi0, n, &basis).unwrap(), 0.5, KrylovOptions::default()).unwrap().0;
    let phi_t = traj.at(0.5).unwrap();
    let o = ObservableSpec::cosine(4);
    let m = fluctuation_moments(&psi, &o, phi_t, n, 0.5).unwrap();
    let c = o.centered(phi_t).unwrap();
    let c2 = &c * &c;
    let cc = CMatrix::from_fn(16, 16, |p, q| c[(p / 4, q / 4)] * c[(p % 4, q % 4)]);
    let g1 = gamma1(&psi, n).unwrap();
    let g2 = gamma2(&psi, n).unwrap();
    let want = g1.expectation(&c2).unwrap().re + (n - 1) as f64 * g2.expectation(&cc).unwrap().re;
    assert!((m.variance - want).abs() < 1e-9, "{} vs {want}", m.variance);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moments_scale_and_shift(seed in 0u64..1000, c in 0.2f64..3.0, shift in -2.0f64..2.0) {
        let mut r = rng(seed);
        let phi = random_wave(&mut r, 3, 1.0);
        let basis = Arc::new(FockBasis::sector(3, 4).unwrap());
        let psi = random_state(&mut r, &basis, 4);
        let base = ObservableSpec::hopping(3);
        let scaled = ObservableSpec::new("scaled", base.matrix().scale(C64::new(c, 0.0))).unwrap();
        let shifted = ObservableSpec::new(
            "shifted",
            base.matrix() + &CMatrix::identity(3).scale(C64::new(shift, 0.0)),
        ).unwrap();
        let a = fluctuation_moments(&psi, &base, &phi, 4, 0.0).unwrap();
        let b = fluctuation_moments(&psi, &scaled, &phi, 4, 0.0).unwrap();
        let s = fluctuation_moments(&psi, &shifted, &phi, 4, 0.0).unwrap();
        prop_assert!((b.variance - c * c * a.variance).abs() < 1e-9);
        prop_assert!((b.kurtosis.unwrap() - a.kurtosis.unwrap()).abs() < 1e-9);
        prop_assert!((s.variance - a.variance).abs() < 1e-9);
        prop_assert!((s.fourth - a.fourth).abs() < 1e-9);
        prop_assert!((s.mean - a.mean).abs() < 1e-9);
        prop_assert!(a.kurtosis.unwrap() >= 1.0 - 1e-12);
    }
}

#[test]
fn free_theory_matches_closed_form() {
    let table = clt_study(&setup(PairPotential::zero(4), vec![0.0, 0.6], vec![2, 5])).unwrap();
    for row in &table.rows {
        // Free product states stay product states.
        assert!((row.moments.variance - row.classical).abs() < 1e-9, "{row:?}");
        assert!((row.sigma2 - row.classical).abs() < 1e-6, "{row:?}");
    }
}

#[test]
fn interacting_residuals_shrink() {
    let (_, v) = interacting(4, 1.0);
    let table = clt_study(&setup(v, vec![0.0, 0.5], vec![2, 4, 8])).unwrap();
    for row in table.rows_at(0.0) {
        assert!(row.residual <= 1e-9);
    }
    let res: Vec<f64> = table.rows_at(0.5).map(|r| r.residual).collect();
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
    let lln: Vec<f64> = table.rows_at(0.5).map(|r| r.lln_bound).collect();
    assert!(lln.windows(2).all(|w| w[1] < w[0]), "{lln:?}");
    assert!(table.residual_exponents.iter().any(|&(t, p)| t == 0.5 && p < 0.0));
}

#[test]
fn infeasible_sizes_fail_first() {
    let mut s = setup(PairPotential::zero(8), vec![0.5], vec![4, 40]);
    s.memory_budget = 1 << 20;
    assert!(matches!(clt_study(&s), Err(meanfield_core::Error::Infeasible { .. })));
}
