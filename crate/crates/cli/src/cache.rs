//! Shared cache of assembled Hamiltonians.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use meanfield_core::fock::{build_hamiltonian, FockBasis, HamiltonianSource, SecondQuantizedOperator};
use meanfield_core::{PairPotential, Result};

type Key = (u64, Vec<u64>, usize);

/// `H_N` keyed by basis fingerprint, potential bits and `N`.
///
/// Safe to share between worker threads. Two threads missing on the same
/// key both assemble; the later insertion wins, and both results are equal.
#[derive(Default)]
pub struct OperatorCache {
    map: RwLock<HashMap<Key, Arc<SecondQuantizedOperator>>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl OperatorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(hits, misses)` so far.
    pub fn stats(&self) -> (usize, usize) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    fn key(v: &PairPotential, n: usize, basis: &FockBasis) -> Key {
        (basis.fingerprint(), v.values().iter().map(|x| x.to_bits()).collect(), n)
    }
}

impl HamiltonianSource for OperatorCache {
    fn hamiltonian(&self, v: &PairPotential, n: usize, basis: &Arc<FockBasis>) -> Result<Arc<SecondQuantizedOperator>> {
        let key = Self::key(v, n, basis);
        if let Some(h) = self.map.read().expect("cache lock").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(h.clone());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let h = Arc::new(build_hamiltonian(v, n, basis)?);
        self.map.write().expect("cache lock").insert(key, h.clone());
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_request_hits() {
        let cache = OperatorCache::new();
        let v = PairPotential::gaussian(3, 1.0, 1.0).unwrap();
        let b = Arc::new(FockBasis::sector(3, 2).unwrap());
        let a = cache.hamiltonian(&v, 2, &b).unwrap();
        let again = cache.hamiltonian(&v, 2, &Arc::new(FockBasis::sector(3, 2).unwrap())).unwrap();
        assert!(Arc::ptr_eq(&a, &again));
        cache.hamiltonian(&v, 4, &b).unwrap();
        cache.hamiltonian(&PairPotential::zero(3), 2, &b).unwrap();
        assert_eq!(cache.stats(), (1, 3));
        assert_eq!(cache.len(), 3);
    }

    #[test]
    fn concurrent_insertion() {
        let cache = OperatorCache::new();
        let v = PairPotential::gaussian(3, 0.5, 1.0).unwrap();
        std::thread::scope(|s| {
            for k in 0..8 {
                let cache = &cache;
                let v = &v;
                s.spawn(move || {
                    let b = Arc::new(FockBasis::sector(3, 1 + k % 3).unwrap());
                    cache.hamiltonian(v, 4, &b).unwrap();
                });
            }
        });
        assert_eq!(cache.len(), 3);
        let (hits, misses) = cache.stats();
        assert_eq!(hits + misses, 8);
    }
}
