//! Compressed sparse row storage and a left-looking sparse Cholesky factor.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), vals: Vec::new() }
    }

    /// Build from `(row, col, value)` triplets. Duplicates are summed and
    /// explicit zeros after summation are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, Error> {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= nrows {
                return Err(Error::IndexOutOfRange { index: r, len: nrows });
            }
            if c >= ncols {
                return Err(Error::IndexOutOfRange { index: c, len: ncols });
            }
            t.push((r, c, v));
        }
        t.sort_unstable_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut vals = Vec::with_capacity(t.len());
        let mut k = 0;
        while k < t.len() {
            let (r, c, mut v) = t[k];
            k += 1;
            while k < t.len() && t[k].0 == r && t[k].1 == c {
                v += t[k].2;
                k += 1;
            }
            if v != 0.0 {
                col_idx.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self { nrows, ncols, row_ptr, col_idx, vals })
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.vals[a..b])
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += v * x[*c];
            }
            y[r] = s;
        }
    }

    /// `x += alpha · Aᵀ y`
    pub fn mul_t_vec_add(&self, alpha: f64, y: &[f64], x: &mut [f64]) {
        debug_assert_eq!(y.len(), self.nrows);
        debug_assert_eq!(x.len(), self.ncols);
        for r in 0..self.nrows {
            let yr = alpha * y[r];
            if yr == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                x[*c] += v * yr;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            let (cols, vs) = self.row(r);
            for (c, v) in cols.iter().zip(vs) {
                let pos = next[*c];
                col_idx[pos] = r;
                vals[pos] = *v;
                next[*c] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, vals }
    }

    /// Dense row-major copy; meant for tests and tiny problems.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows * self.ncols];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                out[r * self.ncols + c] += v;
            }
        }
        out
    }
}

/// Sparse Cholesky factor `P A Pᵀ = L Lᵀ` with a fixed symmetric permutation.
///
/// `perm[k]` is the original index placed at position `k`. The column
/// patterns of `L` come from the elimination game on the graph of `A`
/// under the same ordering (see [`crate::ordering`]).
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    min_pivot: f64,
    max_pivot: f64,
}

impl SparseCholesky {
    /// Factor the symmetric matrix given by its lower-triangle triplets
    /// `(i, j, v)` with `i ≥ j` (original indexing, duplicates summed).
    ///
    /// `perm` is the elimination order and `pattern[k]` (permuted indexing)
    /// the strictly-below-diagonal row set of column `k`, sorted ascending.
    pub fn factor(
        n: usize,
        lower: &[(usize, usize, f64)],
        perm: &[usize],
        pattern: &[Vec<usize>],
    ) -> Result<Self, Error> {
        if perm.len() != n || pattern.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
        }
        let mut inv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        // permuted matrix, lower part, stored per column
        let mut acols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in lower {
            let (pi, pj) = (inv[i], inv[j]);
            let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
            acols[c].push((r, v));
        }

        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + 1 + pattern[k].len();
        }
        let nnz = col_ptr[n];
        let mut row_idx = Vec::with_capacity(nnz);
        for k in 0..n {
            row_idx.push(k);
            row_idx.extend_from_slice(&pattern[k]);
        }
        let mut vals = vec![0.0; nnz];

        // row structure: rows[j] = columns k < j with L[j,k] ≠ 0
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for k in 0..n {
            for &i in &pattern[k] {
                if i <= k || i >= n {
                    return Err(Error::InvalidProblem("cholesky pattern must be strictly lower"));
                }
                rows[i].push(k);
            }
        }
        // position of the next unseen row inside each column
        let mut next = vec![0usize; n];
        for k in 0..n {
            next[k] = col_ptr[k] + 1;
        }

        let mut work = vec![0.0; n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for j in 0..n {
            for &(r, v) in &acols[j] {
                work[r] += v;
            }
            for &k in &rows[j] {
                let pos = next[k];
                debug_assert_eq!(row_idx[pos], j);
                let ljk = vals[pos];
                for q in pos..col_ptr[k + 1] {
                    work[row_idx[q]] -= vals[q] * ljk;
                }
                next[k] += 1;
            }
            let d = work[j];
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::FactorizationFailure { pivot: j, value: d });
            }
            min_pivot = min_pivot.min(d);
            max_pivot = max_pivot.max(d);
            let ljj = libm::sqrt(d);
            work[j] = 0.0;
            vals[col_ptr[j]] = ljj;
            for q in col_ptr[j] + 1..col_ptr[j + 1] {
                let i = row_idx[q];
                vals[q] = work[i] / ljj;
                work[i] = 0.0;
            }
            // entries of A outside the symbolic pattern would be lost silently
            for &(r, _) in &acols[j] {
                if work[r] != 0.0 {
                    return Err(Error::InvalidProblem("cholesky pattern misses matrix entries"));
                }
            }
        }
        if n == 0 {
            min_pivot = 1.0;
            max_pivot = 1.0;
        }
        Ok(Self { n, perm: perm.to_vec(), col_ptr, row_idx, vals, min_pivot, max_pivot })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn pivot_range(&self) -> (f64, f64) {
        (self.min_pivot, self.max_pivot)
    }

    /// Overwrite `b` with `A⁻¹ b`; `work` must have length `n`.
    pub fn solve_in_place(&self, b: &mut [f64], work: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            work[k] = b[self.perm[k]];
        }
        for j in 0..n {
            let (a, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
            let xj = work[j] / self.vals[a];
            work[j] = xj;
            for q in a + 1..e {
                work[self.row_idx[q]] -= self.vals[q] * xj;
            }
        }
        for j in (0..n).rev() {
            let (a, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
            let mut s = work[j];
            for q in a + 1..e {
                s -= self.vals[q] * work[self.row_idx[q]];
            }
            work[j] = s / self.vals[a];
        }
        for k in 0..n {
            b[self.perm[k]] = work[k];
        }
    }
}
