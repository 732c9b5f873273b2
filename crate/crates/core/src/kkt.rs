//! Cached factorizations and the linear solves of the ADMM engines.
//!
//! Two systems occur:
//!
//! * the saddle-point system `[[D, Aᵀ], [A, 0]] [x; y] = [r_x; r_y]` of the
//!   primal and dual engines, solved through `A D⁻¹ Aᵀ`;
//! * the affine step `(I + Q) û = w` of the embedding, reduced by two block
//!   eliminations and two uses of the matrix inversion lemma to a solve
//!   with `I + A P⁻¹ Aᵀ`, where `P = I + D/2`.
//!
//! The `m × m` matrix is factored once with a dense or sparse Cholesky
//! factor depending on size and fill.

use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::DecomposedProblem;
use crate::dense::DenseCholesky;
use crate::error::Error;
use crate::ordering;
use crate::sparse::{CsrMatrix, SparseCholesky};
use crate::vecops::dot;

/// Above this many constraints the sparse factor is tried first.
pub const DENSE_MAX_M: usize = 500;
/// Predicted factor density above which the dense factor is used anyway.
pub const DENSE_FILL_RATIO: f64 = 0.5;
/// Relative pivot size below which `A` is reported as rank deficient.
pub const RANK_WARN_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktMode {
    /// Factor `A D⁻¹ Aᵀ` (primal and dual engines).
    PrimalDual,
    /// Factor `I + A (I + D/2)⁻¹ Aᵀ` (embedding engine).
    Hsde,
}

#[derive(Debug, Clone)]
pub enum SpdFactor {
    Dense(DenseCholesky),
    Sparse(SparseCholesky),
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        match self {
            SpdFactor::Dense(f) => f.dim(),
            SpdFactor::Sparse(f) => f.dim(),
        }
    }

    pub fn pivot_range(&self) -> (f64, f64) {
        match self {
            SpdFactor::Dense(f) => f.pivot_range(),
            SpdFactor::Sparse(f) => f.pivot_range(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, SpdFactor::Sparse(_))
    }

    pub fn solve_in_place(&self, b: &mut [f64], work: &mut [f64]) {
        match self {
            SpdFactor::Dense(f) => f.solve_in_place(b),
            SpdFactor::Sparse(f) => f.solve_in_place(b, work),
        }
    }
}

/// Factor `A diag(w) Aᵀ + shift · I`.
pub fn factor_gram(a: &CsrMatrix, w: &[f64], shift: f64) -> Result<SpdFactor, Error> {
    let m = a.nrows;
    let at = a.transpose();
    let mut pair_count = 0usize;
    for j in 0..at.nrows {
        let k = at.row_ptr[j + 1] - at.row_ptr[j];
        pair_count += k * (k + 1) / 2;
    }
    let dense_size = m * (m + 1) / 2;
    if m <= DENSE_MAX_M || pair_count >= dense_size {
        return factor_dense(&at, m, w, shift);
    }
    let mut lower: Vec<(usize, usize, f64)> = Vec::with_capacity(pair_count + m);
    for j in 0..at.nrows {
        let (rows, vals) = at.row(j);
        for p in 0..rows.len() {
            for q in 0..=p {
                let (ra, rb) = (rows[p], rows[q]);
                let v = vals[p] * vals[q] * w[j];
                if ra >= rb {
                    lower.push((ra, rb, v));
                } else {
                    lower.push((rb, ra, v));
                }
            }
        }
    }
    for i in 0..m {
        lower.push((i, i, shift));
    }
    let mut adj = vec![Vec::new(); m];
    for &(r, c, _) in &lower {
        if r != c {
            adj[r].push(c);
            adj[c].push(r);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    let elim = ordering::minimum_degree(&adj);
    let factor_nnz = elim.fill_nnz() + m;
    if factor_nnz as f64 > DENSE_FILL_RATIO * dense_size as f64 {
        return factor_dense(&at, m, w, shift);
    }
    let pattern = elim.factor_pattern();
    Ok(SpdFactor::Sparse(SparseCholesky::factor(m, &lower, &elim.order, &pattern)?))
}

fn factor_dense(at: &CsrMatrix, m: usize, w: &[f64], shift: f64) -> Result<SpdFactor, Error> {
    let mut g = vec![0.0; m * m];
    for j in 0..at.nrows {
        let (rows, vals) = at.row(j);
        for p in 0..rows.len() {
            let vp = vals[p] * w[j];
            for q in 0..=p {
                let (ra, rb) = (rows[p], rows[q]);
                let (r, c) = if ra >= rb { (ra, rb) } else { (rb, ra) };
                g[r * m + c] += vp * vals[q];
            }
        }
    }
    for i in 0..m {
        g[i * m + i] += shift;
    }
    Ok(SpdFactor::Dense(DenseCholesky::factor(&g, m)?))
}

/// Factorization and constant vectors computed once before iterating.
#[derive(Debug, Clone)]
pub struct KktCache {
    pub mode: KktMode,
    pub factor: SpdFactor,
    /// `D⁻¹` (primal-dual) or `P⁻¹ = (I + D/2)⁻¹` (embedding).
    pub diag_inv: Vec<f64>,
    /// `M⁻¹ζ / (1 + ζᵀM⁻¹ζ)` for the embedding; empty otherwise.
    pub zeta_hat: Vec<f64>,
    /// Set when the smallest pivot of `A D⁻¹ Aᵀ` is tiny relative to the
    /// largest one, which signals (near) linear dependence among the
    /// constraints. Always `false` for the embedding factor.
    pub rank_warning: bool,
}

/// Scratch vectors for the solves.
#[derive(Debug, Clone)]
pub struct KktWorkspace {
    m1: Vec<f64>,
    m2: Vec<f64>,
    n1: Vec<f64>,
    nd1: Vec<f64>,
    nu: Vec<f64>,
}

impl KktWorkspace {
    pub fn new(dp: &DecomposedProblem) -> Self {
        Self {
            m1: vec![0.0; dp.m],
            m2: vec![0.0; dp.m],
            n1: vec![0.0; dp.n_x],
            nd1: vec![0.0; dp.nd],
            nu: vec![0.0; embedding_len(dp) - 1],
        }
    }
}

/// Length of the embedding vector `u = (x, s, y, t, τ)`.
pub fn embedding_len(dp: &DecomposedProblem) -> usize {
    dp.n_x + 2 * dp.nd + dp.m + 1
}

/// Factor the system for `mode`.
pub fn kkt_factor(dp: &DecomposedProblem, mode: KktMode) -> Result<KktCache, Error> {
    if dp.d.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidProblem("overlap diagonal has a zero entry"));
    }
    let (diag_inv, shift): (Vec<f64>, f64) = match mode {
        KktMode::PrimalDual => (dp.d.iter().map(|&v| 1.0 / v).collect(), 0.0),
        KktMode::Hsde => (dp.d.iter().map(|&v| 1.0 / (1.0 + 0.5 * v)).collect(), 1.0),
    };
    let factor = factor_gram(&dp.a, &diag_inv, shift)?;
    let (lo, hi) = factor.pivot_range();
    // the identity shift of the embedding matrix hides rank loss, so only the
    // saddle-point factor can report it
    let rank_warning = mode == KktMode::PrimalDual && lo < RANK_WARN_RATIO * hi;
    let mut cache = KktCache { mode, factor, diag_inv, zeta_hat: Vec::new(), rank_warning };
    if mode == KktMode::Hsde {
        let len = embedding_len(dp) - 1;
        let mut zeta = vec![0.0; len];
        zeta[..dp.n_x].copy_from_slice(&dp.c);
        let y0 = dp.n_x + dp.nd;
        for i in 0..dp.m {
            zeta[y0 + i] = -dp.b[i];
        }
        let mut ws = KktWorkspace::new(dp);
        let mut mz = vec![0.0; len];
        inner_solve(&cache, dp, &zeta, &mut mz, &mut ws);
        let denom = 1.0 + dot(&zeta, &mz);
        cache.zeta_hat = mz.into_iter().map(|v| v / denom).collect();
    }
    Ok(cache)
}

/// Solve `[[D, Aᵀ], [A, 0]] [x; y] = [rhs_x; rhs_y]`.
pub fn kkt_solve(
    cache: &KktCache,
    dp: &DecomposedProblem,
    rhs_x: &[f64],
    rhs_y: &[f64],
    x: &mut [f64],
    y: &mut [f64],
    ws: &mut KktWorkspace,
) -> Result<(), Error> {
    if cache.mode != KktMode::PrimalDual {
        return Err(Error::InvalidOption("cache was not built for the saddle-point system"));
    }
    if rhs_x.len() != dp.n_x || x.len() != dp.n_x {
        return Err(Error::DimensionMismatch { expected: dp.n_x, got: rhs_x.len().min(x.len()) });
    }
    if rhs_y.len() != dp.m || y.len() != dp.m {
        return Err(Error::DimensionMismatch { expected: dp.m, got: rhs_y.len().min(y.len()) });
    }
    for j in 0..dp.n_x {
        ws.n1[j] = cache.diag_inv[j] * rhs_x[j];
    }
    dp.a.mul_vec(&ws.n1, y);
    for i in 0..dp.m {
        y[i] -= rhs_y[i];
    }
    cache.factor.solve_in_place(y, &mut ws.m1);
    x.copy_from_slice(rhs_x);
    dp.a.mul_t_vec_add(-1.0, y, x);
    for j in 0..dp.n_x {
        x[j] *= cache.diag_inv[j];
    }
    Ok(())
}

/// Solve `M σ = ν` with `M = [[I, −Âᵀ], [Â, I]]`, `Â = [[A, 0], [H, −I]]`.
///
/// Both vectors are ordered `(x, s, y, t)`.
pub fn inner_solve(cache: &KktCache, dp: &DecomposedProblem, nu: &[f64], sigma: &mut [f64], ws: &mut KktWorkspace) {
    let (n, nd, m) = (dp.n_x, dp.nd, dp.m);
    let (nu_x, rest) = nu.split_at(n);
    let (nu_s, rest) = rest.split_at(nd);
    let (nu_y, nu_t) = rest.split_at(m);
    let (sx, rest) = sigma.split_at_mut(n);
    let (ss, rest) = rest.split_at_mut(nd);
    let (sy, st) = rest.split_at_mut(m);

    // f = ν₁ + Âᵀν₂:  f_x = ν_x + Aᵀν_y + Hᵀν_t,  f_s = ν_s − ν_t
    let f_s = &mut ws.nd1;
    for k in 0..nd {
        f_s[k] = nu_s[k] - nu_t[k];
    }
    // r = f_x + Hᵀ f_s / 2, kept in sx
    sx.copy_from_slice(nu_x);
    dp.a.mul_t_vec_add(1.0, nu_y, sx);
    dp.apply_ht_add(1.0, nu_t, sx);
    dp.apply_ht_add(0.5, f_s, sx);
    // p = P⁻¹(r − Aᵀ F⁻¹ A P⁻¹ r)
    for j in 0..n {
        ws.n1[j] = cache.diag_inv[j] * sx[j];
    }
    dp.a.mul_vec(&ws.n1, &mut ws.m2);
    cache.factor.solve_in_place(&mut ws.m2, &mut ws.m1);
    dp.a.mul_t_vec_add(-1.0, &ws.m2, sx);
    for j in 0..n {
        sx[j] *= cache.diag_inv[j];
    }
    // q = (f_s + H p) / 2, kept in ss; st = H p for now
    dp.apply_h(sx, st);
    for k in 0..nd {
        ss[k] = 0.5 * (f_s[k] + st[k]);
    }
    // σ₂ = ν₂ − Â σ₁:  (ν_y − A p,  ν_t − H p + q)
    dp.a.mul_vec(sx, sy);
    for i in 0..m {
        sy[i] = nu_y[i] - sy[i];
    }
    for k in 0..nd {
        st[k] = nu_t[k] - st[k] + ss[k];
    }
}

/// Solve `(I + Q) û = w` for the embedding (`w = u + v`).
pub fn hsde_affine(
    cache: &KktCache,
    dp: &DecomposedProblem,
    w: &[f64],
    out: &mut [f64],
    ws: &mut KktWorkspace,
) -> Result<(), Error> {
    if cache.mode != KktMode::Hsde {
        return Err(Error::InvalidOption("cache was not built for the embedding"));
    }
    let len = embedding_len(dp);
    if w.len() != len || out.len() != len {
        return Err(Error::DimensionMismatch { expected: len, got: w.len().min(out.len()) });
    }
    let l1 = len - 1;
    let omega2 = w[l1];
    let y0 = dp.n_x + dp.nd;
    // ν = ω₁ − ω₂ ζ with ζ = (c, 0, −b, 0)
    let mut nu = core::mem::take(&mut ws.nu);
    nu.copy_from_slice(&w[..l1]);
    for j in 0..dp.n_x {
        nu[j] -= omega2 * dp.c[j];
    }
    for i in 0..dp.m {
        nu[y0 + i] += omega2 * dp.b[i];
    }
    {
        let (g, _) = out.split_at_mut(l1);
        inner_solve(cache, dp, &nu, g, ws);
    }
    ws.nu = nu;
    let zeta_dot = |v: &[f64]| -> f64 { dot(&dp.c, &v[..dp.n_x]) - dot(&dp.b, &v[y0..y0 + dp.m]) };
    let zg = zeta_dot(&out[..l1]);
    for k in 0..l1 {
        out[k] -= cache.zeta_hat[k] * zg;
    }
    out[l1] = omega2 + zeta_dot(&out[..l1]);
    Ok(())
}
