//! Dense kernels for small blocks: symmetric vectorization, the symmetric
//! eigensolver used by the PSD projections, and a dense Cholesky factor.
//!
//! Matrices are stored row-major in flat slices. Symmetric vectorization
//! (`svec`) stacks the upper triangle column by column and scales the
//! off-diagonal entries by `√2`, so `⟨svec(A), svec(B)⟩ = tr(AB)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::error::Error;

/// Length of `svec` for a `d × d` symmetric matrix.
#[inline]
pub const fn svec_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Position of entry `(i, j)` with `i ≤ j` inside `svec`.
#[inline]
pub const fn svec_index(i: usize, j: usize) -> usize {
    j * (j + 1) / 2 + i
}

/// Inverse of [`svec_len`]; `None` when `len` is not triangular.
pub fn side_from_svec_len(len: usize) -> Option<usize> {
    let d = ((libm::sqrt((8 * len + 1) as f64) - 1.0) / 2.0) as usize;
    (d.saturating_sub(1)..=d + 1).find(|&k| svec_len(k) == len)
}

/// Unpack `v = svec(M)` into the full row-major `d × d` matrix `out`.
pub fn smat(v: &[f64], d: usize, out: &mut [f64]) {
    debug_assert_eq!(v.len(), svec_len(d));
    debug_assert_eq!(out.len(), d * d);
    let inv = 1.0 / SQRT_2;
    for j in 0..d {
        for i in 0..j {
            let x = v[svec_index(i, j)] * inv;
            out[i * d + j] = x;
            out[j * d + i] = x;
        }
        out[j * d + j] = v[svec_index(j, j)];
    }
}

/// Pack the upper triangle of the row-major `d × d` matrix `m` into `out`.
pub fn svec(m: &[f64], d: usize, out: &mut [f64]) {
    debug_assert_eq!(m.len(), d * d);
    debug_assert_eq!(out.len(), svec_len(d));
    for j in 0..d {
        for i in 0..j {
            out[svec_index(i, j)] = SQRT_2 * m[i * d + j];
        }
        out[svec_index(j, j)] = m[j * d + j];
    }
}

/// Sink for floating-point operation counts.
///
/// The eigensolver and projection are generic over this so a counting run
/// can be compared against the closed-form cost model; `()` discards.
pub trait FlopTally {
    fn add(&mut self, flops: u64);
}

impl FlopTally for () {
    #[inline(always)]
    fn add(&mut self, _flops: u64) {}
}

impl FlopTally for u64 {
    #[inline]
    fn add(&mut self, flops: u64) {
        *self += flops;
    }
}

/// Eigen-decomposition `A = V diag(values) Vᵀ` of a symmetric matrix.
///
/// `values` are ascending; `vectors` is row-major with eigenvector `k` stored
/// in column `k`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymEigen {
    #[inline]
    pub fn vector_entry(&self, row: usize, k: usize) -> f64 {
        self.vectors[row * self.n + k]
    }
}

/// Symmetric eigendecomposition of the row-major matrix `a` (only the lower
/// triangle is read). Householder tridiagonalization followed by implicit QL.
pub fn sym_eigen(a: &[f64], n: usize) -> Result<SymEigen, Error> {
    sym_eigen_tally(a, n, &mut ())
}

pub fn sym_eigen_tally<T: FlopTally>(a: &[f64], n: usize, tally: &mut T) -> Result<SymEigen, Error> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
    }
    if n == 0 {
        return Ok(SymEigen { n, values: Vec::new(), vectors: Vec::new() });
    }
    let mut v = a.to_vec();
    // symmetrize from the lower triangle
    for i in 0..n {
        for j in 0..i {
            v[j * n + i] = v[i * n + j];
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e, n, tally);
    tridiagonal_ql(&mut v, &mut d, &mut e, n, tally)?;
    Ok(SymEigen { n, values: d, vectors: v })
}

fn tridiagonalize<T: FlopTally>(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize, tally: &mut T) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in j + 1..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
            let i64_ = i as u64;
            tally.add(4 * i64_ * i64_ + 10 * i64_);
        }
        d[i] = h;
    }
    // accumulate transformations
    for i in 0..n - 1 {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
            let s = (i + 1) as u64;
            tally.add(4 * s * s + s);
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

fn tridiagonal_ql<T: FlopTally>(
    v: &mut [f64],
    d: &mut [f64],
    e: &mut [f64],
    n: usize,
    tally: &mut T,
) -> Result<(), Error> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    let max_iter = 60 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::EigFailure { n });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in l + 2..n {
                    d[i] -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let row = k * n;
                        h = v[row + i + 1];
                        v[row + i + 1] = s * v[row + i] + c * h;
                        v[row + i] = c * v[row + i] - s * h;
                    }
                }
                tally.add(((m - l) as u64) * (6 * n as u64 + 20));
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // selection sort, ascending
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in i + 1..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                v.swap(r * n + i, r * n + k);
            }
        }
    }
    Ok(())
}

/// Dense Cholesky factor `A = L Lᵀ` (row-major lower triangle).
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
    min_pivot: f64,
    max_pivot: f64,
}

impl DenseCholesky {
    pub fn factor(a: &[f64], n: usize) -> Result<Self, Error> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
        }
        let mut l = a.to_vec();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for j in 0..n {
            let mut diag = l[j * n + j];
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::FactorizationFailure { pivot: j, value: diag });
            }
            min_pivot = min_pivot.min(diag);
            max_pivot = max_pivot.max(diag);
            let ljj = libm::sqrt(diag);
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut s = l[i * n + j];
                let (ri, rj) = (i * n, j * n);
                for k in 0..j {
                    s -= l[ri + k] * l[rj + k];
                }
                l[i * n + j] = s / ljj;
            }
            for i in 0..j {
                l[i * n + j] = 0.0;
            }
        }
        if n == 0 {
            min_pivot = 1.0;
            max_pivot = 1.0;
        }
        Ok(Self { n, l, min_pivot, max_pivot })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest and largest pivot `d_j` encountered (before the square root).
    pub fn pivot_range(&self) -> (f64, f64) {
        (self.min_pivot, self.max_pivot)
    }

    /// Overwrite `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let mut s = b[i];
            let row = &self.l[i * n..i * n + i];
            for (k, lik) in row.iter().enumerate() {
                s -= lik * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// The factor `L` (row-major, upper part zero).
    pub fn lower(&self) -> &[f64] {
        &self.l
    }
}
