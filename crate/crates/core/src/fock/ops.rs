//! Creation, annihilation and second-quantized operators.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::{FockBasis, FockState};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, PairPotential, WaveFunction};
use crate::linalg::CMatrix;
use crate::sparse::{CsrMatrix, LinearOperator};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const TOP_SECTOR_TOL: f64 = 1e-10;

/// Which symmetry a generator carries, used to pick a propagation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Hermitian,
    AntiHermitian,
    General,
}

/// Sparse matrix over a [`FockBasis`] together with its structural flags.
#[derive(Debug, Clone)]
pub struct SecondQuantizedOperator {
    basis: Arc<FockBasis>,
    matrix: CsrMatrix,
    symmetry: Symmetry,
    number_conserving: bool,
}

impl SecondQuantizedOperator {
    /// Wraps a matrix after checking the claimed flags.
    pub fn new(
        basis: Arc<FockBasis>,
        matrix: CsrMatrix,
        symmetry: Symmetry,
        number_conserving: bool,
    ) -> Result<Self> {
        if matrix.dim() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: matrix.dim() });
        }
        let op = Self { basis, matrix, symmetry, number_conserving };
        op.check_flags()?;
        Ok(op)
    }

    pub(crate) fn trusted(
        basis: Arc<FockBasis>,
        matrix: CsrMatrix,
        symmetry: Symmetry,
        number_conserving: bool,
    ) -> Self {
        debug_assert_eq!(matrix.dim(), basis.len());
        Self { basis, matrix, symmetry, number_conserving }
    }

    /// Verifies the symmetry flag to `1e-12` and, if claimed, that no entry
    /// connects different particle-number sectors.
    pub fn check_flags(&self) -> Result<()> {
        match self.symmetry {
            Symmetry::Hermitian if self.matrix.hermitian_deviation() > 1e-12 => {
                return Err(Error::NotHermitian)
            }
            Symmetry::AntiHermitian if self.matrix.anti_hermitian_deviation() > 1e-12 => {
                return Err(Error::NotHermitian)
            }
            _ => {}
        }
        if self.number_conserving {
            for (r, c, _) in self.matrix.entries() {
                if self.basis.particles(r) != self.basis.particles(c) {
                    return Err(Error::InvalidParameter("operator flagged number-conserving mixes sectors"));
                }
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn is_hermitian(&self) -> bool {
        self.symmetry == Symmetry::Hermitian
    }

    pub fn is_number_conserving(&self) -> bool {
        self.number_conserving
    }

    pub fn apply(&self, psi: &FockState) -> Result<FockState> {
        self.check_state(psi)?;
        Ok(psi.with_amplitudes(self.matrix.apply(psi.amplitudes())))
    }

    /// `⟨ψ, A ψ⟩`.
    pub fn expectation(&self, psi: &FockState) -> Result<C64> {
        psi.inner(&self.apply(psi)?)
    }

    pub(crate) fn check_state(&self, psi: &FockState) -> Result<()> {
        if psi.basis().len() != self.basis.len() || psi.basis().fingerprint() != self.basis.fingerprint() {
            return Err(Error::DimensionMismatch { expected: self.basis.len(), found: psi.basis().len() });
        }
        Ok(())
    }

    /// `c·A + d·B` on the same basis. Flags are kept only when both agree.
    pub fn combine(&self, c: C64, other: &Self, d: C64) -> Result<Self> {
        if other.basis.fingerprint() != self.basis.fingerprint() {
            return Err(Error::DimensionMismatch { expected: self.basis.len(), found: other.basis.len() });
        }
        let trip = self
            .matrix
            .entries()
            .map(|(r, k, v)| (r as u32, k as u32, v * c))
            .chain(other.matrix.entries().map(|(r, k, v)| (r as u32, k as u32, v * d)))
            .collect();
        let real = c.im == 0.0 && d.im == 0.0;
        let symmetry = if self.symmetry == other.symmetry && real { self.symmetry } else { Symmetry::General };
        Ok(Self::trusted(
            self.basis.clone(),
            CsrMatrix::from_triplets(self.basis.len(), trip),
            symmetry,
            self.number_conserving && other.number_conserving,
        ))
    }
}

impl LinearOperator for SecondQuantizedOperator {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        self.matrix.apply_into(x, out)
    }
}

/// Looks up occupation vectors obtained by adding or removing particles.
pub(crate) struct Shifter<'a> {
    basis: &'a FockBasis,
    scratch: Vec<u8>,
}

impl<'a> Shifter<'a> {
    pub(crate) fn new(basis: &'a FockBasis) -> Self {
        Self { basis, scratch: vec![0; basis.sites()] }
    }

    /// Index of `occ` after applying `(site, ±count)` moves in order, or
    /// `None` if an occupation would go negative or the result is not stored.
    pub(crate) fn index(&mut self, occ: &[u8], moves: &[(usize, i32)]) -> Option<usize> {
        self.scratch.copy_from_slice(occ);
        for &(x, d) in moves {
            let v = self.scratch[x] as i32 + d;
            if !(0..=u8::MAX as i32).contains(&v) {
                return None;
            }
            self.scratch[x] = v as u8;
        }
        self.basis.index(&self.scratch)
    }
}

fn check_sites(f: &[C64], basis: &FockBasis) -> Result<()> {
    if f.len() != basis.sites() {
        return Err(Error::DimensionMismatch { expected: basis.sites(), found: f.len() });
    }
    Ok(())
}

fn top_sector_guard(psi: &FockState) -> Result<()> {
    let basis = psi.basis();
    let range = basis.sector_range(basis.n_max())?;
    let peak = psi.amplitudes()[range].iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak > TOP_SECTOR_TOL {
        return Err(Error::Truncation { weight: psi.top_sector_weight(), n_max: basis.n_max() });
    }
    Ok(())
}

/// `Σ_x f(x) a†_x ψ`, with no truncation check.
pub(crate) fn raise(f: &[C64], psi: &FockState) -> FockState {
    let basis = psi.basis();
    let mut out = vec![ZERO; basis.len()];
    let mut sh = Shifter::new(basis);
    for (i, &a) in psi.amplitudes().iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let occ = basis.occupation(i);
        for (x, &fx) in f.iter().enumerate() {
            if fx == ZERO {
                continue;
            }
            if let Some(j) = sh.index(occ, &[(x, 1)]) {
                out[j] += fx * a * ((occ[x] as f64 + 1.0).sqrt());
            }
        }
    }
    psi.with_amplitudes(out)
}

/// `Σ_x conj(f(x)) a_x ψ`; components leaving the stored sectors are dropped.
pub(crate) fn lower(f: &[C64], psi: &FockState) -> FockState {
    let basis = psi.basis();
    let mut out = vec![ZERO; basis.len()];
    let mut sh = Shifter::new(basis);
    for (i, &a) in psi.amplitudes().iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let occ = basis.occupation(i);
        for (x, &fx) in f.iter().enumerate() {
            if fx == ZERO || occ[x] == 0 {
                continue;
            }
            if let Some(j) = sh.index(occ, &[(x, -1)]) {
                out[j] += fx.conj() * a * (occ[x] as f64).sqrt();
            }
        }
    }
    psi.with_amplitudes(out)
}

/// `a†(f) ψ`. Fails if `ψ` reaches the top stored sector, where the result
/// would be silently truncated.
pub fn create(f: &WaveFunction, psi: &FockState) -> Result<FockState> {
    check_sites(f.as_slice(), psi.basis())?;
    top_sector_guard(psi)?;
    Ok(raise(f.as_slice(), psi))
}

/// `a(f) ψ`.
pub fn annihilate(f: &WaveFunction, psi: &FockState) -> Result<FockState> {
    check_sites(f.as_slice(), psi.basis())?;
    Ok(lower(f.as_slice(), psi))
}

/// `A(f, g) ψ = (a†(f) + a(ḡ)) ψ`.
pub fn field_pair(f: &WaveFunction, g: &WaveFunction, psi: &FockState) -> Result<FockState> {
    let up = create(f, psi)?;
    let down = annihilate(&g.conj(), psi)?;
    up.add_scaled(C64::new(1.0, 0.0), &down)
}

fn operator_from_rows<F>(basis: &Arc<FockBasis>, symmetry: Symmetry, conserving: bool, mut row: F) -> SecondQuantizedOperator
where
    F: FnMut(&[u8], &mut Shifter<'_>, &mut Vec<(u32, C64)>),
{
    let mut sh = Shifter::new(basis);
    let matrix = CsrMatrix::from_rows(basis.len(), |i, buf| row(basis.occupation(i), &mut sh, buf));
    SecondQuantizedOperator::trusted(basis.clone(), matrix, symmetry, conserving)
}

/// `𝒩`, diagonal with eigenvalue `Σ_x n_x`.
pub fn number_op(basis: &Arc<FockBasis>) -> SecondQuantizedOperator {
    operator_from_rows(basis, Symmetry::Hermitian, true, |occ, sh, buf| {
        let n: u32 = occ.iter().map(|&k| k as u32).sum();
        buf.push((sh.index(occ, &[]).unwrap() as u32, C64::new(n as f64, 0.0)));
    })
}

/// Rows of `Σ_{x,y} O_xy a†_x a_y`: row `i` couples to `i - e_x + e_y`.
fn push_one_body(o: &CMatrix, occ: &[u8], sh: &mut Shifter<'_>, buf: &mut Vec<(u32, C64)>) {
    let m = occ.len();
    let i = sh.index(occ, &[]).unwrap() as u32;
    let mut diag = ZERO;
    for x in 0..m {
        if occ[x] == 0 {
            continue;
        }
        diag += o[(x, x)] * occ[x] as f64;
        for y in 0..m {
            let v = o[(x, y)];
            if y == x || v == ZERO {
                continue;
            }
            if let Some(j) = sh.index(occ, &[(x, -1), (y, 1)]) {
                let amp = (occ[x] as f64 * (occ[y] as f64 + 1.0)).sqrt();
                buf.push((j as u32, v * amp));
            }
        }
    }
    buf.push((i, diag));
}

/// Second quantization `dΓ(O) = Σ_{x,y} O_xy a†_x a_y` of a one-particle
/// matrix. Flagged Hermitian when `O` is.
pub fn one_body_operator(basis: &Arc<FockBasis>, o: &CMatrix) -> Result<SecondQuantizedOperator> {
    if o.rows() != basis.sites() || o.cols() != basis.sites() {
        return Err(Error::DimensionMismatch { expected: basis.sites(), found: o.rows() });
    }
    let symmetry = if o.hermitian_deviation() <= 1e-12 { Symmetry::Hermitian } else { Symmetry::General };
    Ok(operator_from_rows(basis, symmetry, true, |occ, sh, buf| push_one_body(o, occ, sh, buf)))
}

/// The matrix of `-Δ` on the lattice.
pub fn kinetic_matrix(lattice: &Lattice) -> CMatrix {
    let m = lattice.sites();
    CMatrix::from_fn(m, m, |x, y| C64::new(lattice.kinetic(x, y), 0.0))
}

/// `Σ_{x,y} V(x-y) (n_x n_y - δ_xy n_x)` for one occupation vector.
pub(crate) fn pair_energy(v: &PairPotential, occ: &[u8]) -> f64 {
    let m = occ.len();
    let mut e = 0.0;
    for x in 0..m {
        let nx = occ[x] as f64;
        if nx == 0.0 {
            continue;
        }
        for (y, &oy) in occ.iter().enumerate() {
            let ny = oy as f64 - if x == y { 1.0 } else { 0.0 };
            e += v.between(x, y) * nx * ny;
        }
    }
    e
}

/// `H_N = Σ K_xy a†_x a_y + (1/2N) Σ V(x-y) a†_x a†_y a_y a_x`.
///
/// On the `n`-particle sector this equals `Σ_j -Δ_j + (1/N) Σ_{i<j} V(x_i-x_j)`.
pub fn build_hamiltonian(v: &PairPotential, n: usize, basis: &Arc<FockBasis>) -> Result<SecondQuantizedOperator> {
    if n == 0 {
        return Err(Error::InvalidParameter("the mean-field Hamiltonian needs N ≥ 1"));
    }
    if v.sites() != basis.sites() {
        return Err(Error::DimensionMismatch { expected: basis.sites(), found: v.sites() });
    }
    let k = kinetic_matrix(&Lattice::new(v.sites())?);
    let scale = 0.5 / n as f64;
    Ok(operator_from_rows(basis, Symmetry::Hermitian, true, |occ, sh, buf| {
        push_one_body(&k, occ, sh, buf);
        let i = sh.index(occ, &[]).unwrap() as u32;
        buf.push((i, C64::new(scale * pair_energy(v, occ), 0.0)));
    }))
}

/// Supplies `H_N` for a basis; implementations may cache assembled
/// operators.
pub trait HamiltonianSource {
    fn hamiltonian(&self, v: &PairPotential, n: usize, basis: &Arc<FockBasis>) -> Result<Arc<SecondQuantizedOperator>>;
}

/// Assembles a fresh operator on every request.
#[derive(Debug, Clone, Copy, Default)]
pub struct Assemble;

impl HamiltonianSource for Assemble {
    fn hamiltonian(&self, v: &PairPotential, n: usize, basis: &Arc<FockBasis>) -> Result<Arc<SecondQuantizedOperator>> {
        build_hamiltonian(v, n, basis).map(Arc::new)
    }
}

/// Sparse matrix of `Σ_x f(x) a†_x - conj(f(x)) a_x`, the Weyl generator.
pub(crate) fn weyl_generator_matrix(f: &[C64], basis: &FockBasis) -> CsrMatrix {
    let mut sh = Shifter::new(basis);
    CsrMatrix::from_rows(basis.len(), |i, buf| {
        let occ = basis.occupation(i);
        for (x, &fx) in f.iter().enumerate() {
            if fx == ZERO {
                continue;
            }
            // a†_x part: row i receives from i - e_x.
            if occ[x] > 0 {
                if let Some(j) = sh.index(occ, &[(x, -1)]) {
                    buf.push((j as u32, fx * (occ[x] as f64).sqrt()));
                }
            }
            // a_x part: row i receives from i + e_x.
            if let Some(j) = sh.index(occ, &[(x, 1)]) {
                buf.push((j as u32, -fx.conj() * (occ[x] as f64 + 1.0).sqrt()));
            }
        }
    })
}
