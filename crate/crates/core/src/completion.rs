//! Positive semidefinite completion of a partially specified matrix whose
//! known entries form a chordal pattern, and the clique-wise PSD violation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::dense::sym_eigen;
use crate::error::Error;
use crate::pattern::{CliqueDecomposition, SvecLayout};
use crate::vecops::norm2;

/// Relative eigenvalue cutoff of the separator pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Relative tolerance below which a clique block counts as not PSD.
pub const CLIQUE_PSD_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct Completion {
    pub n: usize,
    /// Row-major `n × n` completed matrix.
    pub matrix: Vec<f64>,
    /// Some clique block was not PSD, so the result need not be PSD either.
    pub warning: bool,
}

fn entry(layout: &SvecLayout, x: &[f64], i: usize, j: usize) -> Option<f64> {
    layout.index(i, j).map(|p| if i == j { x[p] } else { x[p] / SQRT_2 })
}

/// Row-major dense copy of the principal submatrix on `clique`.
pub fn clique_block(layout: &SvecLayout, x: &[f64], clique: &[usize]) -> Result<Vec<f64>, Error> {
    let d = clique.len();
    let mut out = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..=a {
            let v = entry(layout, x, clique[a], clique[b])
                .ok_or(Error::InvalidProblem("clique entry outside the pattern"))?;
            out[a * d + b] = v;
            out[b * d + a] = v;
        }
    }
    Ok(out)
}

/// Maximum-determinant completion, filled clique by clique from the roots of
/// the clique forest towards the leaves.
///
/// For a clique with separator `S` (its overlap with the parent) and new
/// vertices `U`, the entries between `U` and every earlier vertex `R` outside
/// `S` are set to `X_US X_SS⁺ X_SR`.
pub fn psd_complete(cliques: &CliqueDecomposition, layout: &SvecLayout, x: &[f64]) -> Result<Completion, Error> {
    let n = cliques.n;
    if layout.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: layout.n });
    }
    if x.len() != layout.len() {
        return Err(Error::DimensionMismatch { expected: layout.len(), got: x.len() });
    }
    let mut mat = vec![0.0; n * n];
    let mut done = vec![false; n];
    let mut earlier: Vec<usize> = Vec::new();
    let mut warning = false;

    for k in 0..cliques.len() {
        let clique = &cliques.cliques[k];
        let block = clique_block(layout, x, clique)?;
        let d = clique.len();
        for a in 0..d {
            for b in 0..d {
                mat[clique[a] * n + clique[b]] = block[a * d + b];
            }
        }
        if d > 0 {
            let eig = sym_eigen(&block, d)?;
            let scale = norm2(&block).max(1.0);
            if eig.values[0] < -CLIQUE_PSD_TOL * scale {
                warning = true;
            }
        }

        let sep = cliques.separator(k);
        let new: Vec<usize> = clique.iter().copied().filter(|v| sep.binary_search(v).is_err()).collect();
        let rest: Vec<usize> = earlier.iter().copied().filter(|v| sep.binary_search(v).is_err()).collect();
        if !sep.is_empty() && !new.is_empty() && !rest.is_empty() {
            let s = sep.len();
            let mut mss = vec![0.0; s * s];
            for a in 0..s {
                for b in 0..s {
                    mss[a * s + b] = mat[sep[a] * n + sep[b]];
                }
            }
            let eig = sym_eigen(&mss, s)?;
            let lmax = eig.values[s - 1];
            // T = X_SS⁺ X_SR
            let mut t = vec![0.0; s * rest.len()];
            if lmax > 0.0 {
                for r in 0..s {
                    let l = eig.values[r];
                    if l <= PINV_CUTOFF * lmax {
                        continue;
                    }
                    // projection of each column of X_SR on eigenvector r
                    for (c, &v) in rest.iter().enumerate() {
                        let mut proj = 0.0;
                        for a in 0..s {
                            proj += eig.vector_entry(a, r) * mat[sep[a] * n + v];
                        }
                        let coef = proj / l;
                        for a in 0..s {
                            t[a * rest.len() + c] += eig.vector_entry(a, r) * coef;
                        }
                    }
                }
            }
            for &u in &new {
                for (c, &v) in rest.iter().enumerate() {
                    let mut acc = 0.0;
                    for a in 0..s {
                        acc += mat[u * n + sep[a]] * t[a * rest.len() + c];
                    }
                    mat[u * n + v] = acc;
                    mat[v * n + u] = acc;
                }
            }
        }
        for &v in &new {
            if !done[v] {
                done[v] = true;
                earlier.push(v);
            }
        }
    }
    Ok(Completion { n, matrix: mat, warning })
}

/// Normalized violation of clique-wise positive semidefiniteness:
/// `α / (1 + ‖X‖_F)` with `α = max(0, −min_k λ_min(X_{C_k C_k}))` and the
/// Frobenius norm taken over the specified entries.
pub fn psd_violation(cliques: &CliqueDecomposition, layout: &SvecLayout, x: &[f64]) -> Result<f64, Error> {
    Ok(clique_alpha(cliques, layout, x)? / (1.0 + norm2(x)))
}

/// `max(0, −min_k λ_min(X_{C_k C_k}))`.
pub fn clique_alpha(cliques: &CliqueDecomposition, layout: &SvecLayout, x: &[f64]) -> Result<f64, Error> {
    if x.len() != layout.len() {
        return Err(Error::DimensionMismatch { expected: layout.len(), got: x.len() });
    }
    let mut alpha: f64 = 0.0;
    for clique in &cliques.cliques {
        if clique.is_empty() {
            continue;
        }
        let block = clique_block(layout, x, clique)?;
        let eig = sym_eigen(&block, clique.len())?;
        // strict comparison keeps alpha at +0.0 when the smallest eigenvalue is 0.0
        if -eig.values[0] > alpha {
            alpha = -eig.values[0];
        }
    }
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::SparsityPattern;

    #[test]
    fn negative_identity_violation() {
        let g = SparsityPattern::complete(2);
        let cd = g.maximal_cliques().unwrap();
        let layout = SvecLayout::new(&g);
        let x = [-1.0, 0.0, -1.0];
        let eps = psd_violation(&cd, &layout, &x).unwrap();
        assert!((eps - 1.0 / (1.0 + SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn disjoint_cliques_leave_zero_fill() {
        let g = SparsityPattern::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let cd = g.maximal_cliques().unwrap();
        let layout = SvecLayout::new(&g);
        let x: Vec<f64> = layout.entries().map(|(i, j)| if i == j { 2.0 } else { SQRT_2 }).collect();
        let c = psd_complete(&cd, &layout, &x).unwrap();
        assert!(!c.warning);
        assert_eq!(c.matrix[2], 0.0);
        assert_eq!(c.matrix[7], 0.0);
        assert_eq!(c.matrix[1], 1.0);
    }

    #[test]
    fn path_completion_uses_separator() {
        // X = [[1, a, ?], [a, 1, b], [?, b, 1]] completes with ? = a·b
        let g = SparsityPattern::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let cd = g.maximal_cliques().unwrap();
        let layout = SvecLayout::new(&g);
        let (a, b) = (0.5, -0.3);
        let mut x = vec![0.0; layout.len()];
        for (p, (i, j)) in layout.entries().enumerate() {
            x[p] = match (i, j) {
                (0, 1) => a * SQRT_2,
                (1, 2) => b * SQRT_2,
                _ => 1.0,
            };
        }
        let c = psd_complete(&cd, &layout, &x).unwrap();
        assert!((c.matrix[2] - a * b).abs() < 1e-15);
        assert!((c.matrix[6] - a * b).abs() < 1e-15);
    }
}
