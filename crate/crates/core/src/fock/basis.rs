//! Occupation-number basis of the truncated bosonic Fock space.
//!
//! States are grouped by particle number `n` (ascending), and within a sector
//! ordered lexicographically with `n_0` descending, so `(n,0,…,0)` comes first
//! and `(0,…,0,n)` last. Each sector is a contiguous block of indices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Binomial coefficients `C(a, b)` for `a < rows`.
#[derive(Debug, Clone)]
struct Binomials {
    cols: usize,
    table: Vec<u64>,
}

impl Binomials {
    fn new(rows: usize, cols: usize) -> Self {
        let mut table = vec![0u64; rows * cols];
        for a in 0..rows {
            for b in 0..cols {
                table[a * cols + b] = match (a, b) {
                    (_, 0) => 1,
                    (0, _) => 0,
                    _ => table[(a - 1) * cols + b - 1].saturating_add(table[(a - 1) * cols + b]),
                };
            }
        }
        Self { cols, table }
    }

    fn get(&self, a: usize, b: usize) -> u64 {
        if b > a {
            0
        } else {
            self.table[a * self.cols + b]
        }
    }
}

fn binomial(a: u64, b: u64) -> Option<u64> {
    if b > a {
        return Some(0);
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of occupation vectors on `sites` modes with exactly `n` particles.
pub fn sector_dimension(sites: usize, n: usize) -> Option<u64> {
    binomial((n + sites - 1) as u64, (sites - 1) as u64)
}

/// Number of occupation vectors with `n_min ≤ Σn ≤ n_max`, without building
/// anything. `None` on overflow.
pub fn basis_dimension(sites: usize, n_min: usize, n_max: usize) -> Option<u64> {
    let upto = |n: usize| binomial((n + sites) as u64, sites as u64);
    let below = if n_min == 0 { 0 } else { upto(n_min - 1)? };
    Some(upto(n_max)? - below)
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    sites: usize,
    n_min: usize,
    n_max: usize,
    /// Flattened occupations, `sites` bytes per state.
    occupations: Vec<u8>,
    /// `offsets[n - n_min]` is the first index of sector `n`; one extra entry.
    offsets: Vec<usize>,
    binom: Binomials,
}

impl FockBasis {
    /// All states with at most `n_max` particles.
    pub fn new(sites: usize, n_max: usize) -> Result<Self> {
        Self::with_sectors(sites, 0, n_max)
    }

    /// Only the sector with exactly `n` particles.
    pub fn sector(sites: usize, n: usize) -> Result<Self> {
        Self::with_sectors(sites, n, n)
    }

    pub fn with_sectors(sites: usize, n_min: usize, n_max: usize) -> Result<Self> {
        if sites < 1 {
            return Err(Error::InvalidParameter("a Fock basis needs at least one site"));
        }
        if n_min > n_max {
            return Err(Error::InvalidParameter("n_min exceeds n_max"));
        }
        if n_max > u8::MAX as usize {
            return Err(Error::InvalidParameter("occupations above 255 are not supported"));
        }
        let dim = basis_dimension(sites, n_min, n_max)
            .filter(|&d| d <= u32::MAX as u64)
            .ok_or(Error::InvalidParameter("basis too large to index"))? as usize;
        let mut occupations = Vec::with_capacity(dim * sites);
        let mut offsets = Vec::with_capacity(n_max - n_min + 2);
        let mut occ = vec![0u8; sites];
        for n in n_min..=n_max {
            offsets.push(occupations.len() / sites);
            enumerate_sector(&mut occ, 0, n, &mut occupations);
        }
        offsets.push(occupations.len() / sites);
        debug_assert_eq!(occupations.len(), dim * sites);
        Ok(Self {
            sites,
            n_min,
            n_max,
            occupations,
            offsets,
            binom: Binomials::new(n_max + sites + 1, sites + 1),
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn n_min(&self) -> usize {
        self.n_min
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Whether the basis contains the vacuum and every sector up to `n_max`.
    pub fn is_full(&self) -> bool {
        self.n_min == 0
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.sites
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn occupation(&self, i: usize) -> &[u8] {
        &self.occupations[i * self.sites..(i + 1) * self.sites]
    }

    /// Particle number of basis state `i`.
    pub fn particles(&self, i: usize) -> usize {
        match self.offsets.binary_search(&i) {
            Ok(k) => {
                // Empty sectors cannot occur, so the first match is exact.
                self.n_min + k
            }
            Err(k) => self.n_min + k - 1,
        }
    }

    /// Index range of sector `n`.
    pub fn sector_range(&self, n: usize) -> Result<core::ops::Range<usize>> {
        if n < self.n_min || n > self.n_max {
            return Err(Error::SectorOutOfRange { n, n_min: self.n_min, n_max: self.n_max });
        }
        let k = n - self.n_min;
        Ok(self.offsets[k]..self.offsets[k + 1])
    }

    /// Position of an occupation vector, or `None` if it lies outside the
    /// stored sectors.
    pub fn index(&self, occ: &[u8]) -> Option<usize> {
        debug_assert_eq!(occ.len(), self.sites);
        let n: usize = occ.iter().map(|&k| k as usize).sum();
        if n < self.n_min || n > self.n_max {
            return None;
        }
        let mut rank = 0u64;
        let mut remaining = n;
        for (k, &nk) in occ[..self.sites - 1].iter().enumerate() {
            let nk = nk as usize;
            let s = self.sites - k - 1;
            if remaining > nk {
                rank += self.binom.get(remaining - nk - 1 + s, s);
            }
            remaining -= nk;
        }
        Some(self.offsets[n - self.n_min] + rank as usize)
    }

    /// Identifies the basis layout; stored alongside persisted states.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for word in [self.sites as u64, self.n_min as u64, self.n_max as u64, self.len() as u64] {
            for b in word.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

fn enumerate_sector(occ: &mut [u8], site: usize, remaining: usize, out: &mut Vec<u8>) {
    if site + 1 == occ.len() {
        occ[site] = remaining as u8;
        out.extend_from_slice(occ);
        return;
    }
    for k in (0..=remaining).rev() {
        occ[site] = k as u8;
        enumerate_sector(occ, site + 1, remaining - k, out);
    }
    occ[site] = 0;
}
