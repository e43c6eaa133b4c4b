//! Compressed sparse row matrices over the Fock basis.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Anything that can act linearly on a complex vector.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `out = A x`; `out` is overwritten.
    fn apply_into(&self, x: &[C64], out: &mut [C64]);

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim()];
        self.apply_into(x, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, row_ptr: vec![0; n + 1], cols: Vec::new(), vals: Vec::new() }
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates and
    /// dropping entries that cancel to exactly zero.
    pub fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v == ZERO {
                continue;
            }
            row_ptr[r as usize + 1] += 1;
            keep_cols.push(c);
            keep_vals.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols: keep_cols, vals: keep_vals }
    }

    /// Builds row by row. `row(r, buf)` pushes `(col, value)` pairs for row
    /// `r` in any order; duplicates are summed and exact zeros dropped.
    pub fn from_rows<F>(n: usize, mut row: F) -> Self
    where
        F: FnMut(usize, &mut Vec<(u32, C64)>),
    {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut buf = Vec::new();
        for r in 0..n {
            buf.clear();
            row(r, &mut buf);
            buf.sort_unstable_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < buf.len() {
                let (c, mut v) = buf[k];
                k += 1;
                while k < buf.len() && buf[k].0 == c {
                    v += buf[k].1;
                    k += 1;
                }
                if v != ZERO {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let triplets = diag
            .iter()
            .enumerate()
            .map(|(i, &d)| (i as u32, i as u32, d))
            .collect();
        Self::from_triplets(n, triplets)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k] as usize, self.vals[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self
            .entries()
            .map(|(r, c, v)| (c as u32, r as u32, v.conj()))
            .collect();
        Self::from_triplets(self.n, triplets)
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|&v| v * s).collect(),
        }
    }

    /// `max |A - A†|` over all entries.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (r, c, v) in self.entries() {
            dev = dev.max((v - self.get(c, r).conj()).norm());
        }
        dev
    }

    /// `max |A + A†|` over all entries.
    pub fn anti_hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (r, c, v) in self.entries() {
            dev = dev.max((v + self.get(c, r).conj()).norm());
        }
        dev
    }

    /// `max_i Σ_j |a_ij|`, an upper bound on the spectral norm of a
    /// Hermitian matrix.
    pub fn row_sum_bound(&self) -> f64 {
        (0..self.n)
            .map(|r| self.vals[self.row_ptr[r]..self.row_ptr[r + 1]].iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Approximate memory footprint in bytes.
    pub fn bytes(&self) -> usize {
        self.vals.len() * (core::mem::size_of::<C64>() + 4) + self.row_ptr.len() * 8
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.n);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *o = acc;
        }
    }
}

/// `factor · A` without copying `A`.
pub struct Scaled<'a, A: ?Sized> {
    pub op: &'a A,
    pub factor: C64,
}

impl<A: LinearOperator + ?Sized> LinearOperator for Scaled<'_, A> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        self.op.apply_into(x, out);
        for o in out.iter_mut() {
            *o *= self.factor;
        }
    }
}

/// Fixed sparsity pattern shared by a family of operators that differ only
/// in the coefficients of their pieces, `A(c) = Σ_k c_k P_k`. Assembly is a
/// scatter into precomputed slots, so time-dependent generators can be
/// rebuilt every step without sorting.
#[derive(Debug, Clone)]
pub struct PatternedSum {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    /// For each piece: `(slot, value)` pairs.
    pieces: Vec<Vec<(u32, C64)>>,
}

impl PatternedSum {
    pub fn new(n: usize, pieces: &[CsrMatrix]) -> Self {
        let mut coords: Vec<(u32, u32)> = pieces
            .iter()
            .flat_map(|p| p.entries().map(|(r, c, _)| (r as u32, c as u32)))
            .collect();
        coords.sort_unstable();
        coords.dedup();
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _) in &coords {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols: Vec<u32> = coords.iter().map(|&(_, c)| c).collect();
        let slotted = pieces
            .iter()
            .map(|p| {
                p.entries()
                    .map(|(r, c, v)| {
                        let range = row_ptr[r]..row_ptr[r + 1];
                        let k = cols[range.clone()]
                            .binary_search(&(c as u32))
                            .expect("entry present in union pattern");
                        ((range.start + k) as u32, v)
                    })
                    .collect()
            })
            .collect();
        Self { n, row_ptr, cols, pieces: slotted }
    }

    pub fn pieces(&self) -> usize {
        self.pieces.len()
    }

    pub fn assemble(&self, coefs: &[C64]) -> CsrMatrix {
        assert_eq!(coefs.len(), self.pieces.len());
        let mut vals = vec![ZERO; self.cols.len()];
        for (piece, &c) in self.pieces.iter().zip(coefs) {
            if c == ZERO {
                continue;
            }
            for &(slot, v) in piece {
                vals[slot as usize] += c * v;
            }
        }
        CsrMatrix { n: self.n, row_ptr: self.row_ptr.clone(), cols: self.cols.clone(), vals }
    }
}
