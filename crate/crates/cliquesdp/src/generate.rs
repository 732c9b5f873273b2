//! Random benchmark problems that are primal and dual strictly feasible by
//! construction.
//!
//! Both generators draw from `ChaCha8Rng::seed_from_u64(seed)` in a fixed
//! order, so a seed pins the problem bit for bit:
//!
//! 1. the values of `W` on the pattern (upper triangle, row by row),
//! 2. the values of `W'` in the same order,
//! 3. `y_1, …, y_m`,
//! 4. the values of `A_1`, then `A_2`, …, each in pattern order.
//!
//! Every value is `U(0, 1)` (`rand`'s standard `f64` distribution). The
//! problem is then `X_f = W + αI` and `Z_f = W' + α'I` with
//! `α = |λ_min(W)| + 1`, `b_i = ⟨A_i, X_f⟩` and `C = Z_f + Σ y_i A_i`, so
//! `X_f ≻ 0` is primal feasible and `(y, Z_f)` is dual feasible.

use std::collections::BTreeSet;

use cliquesdp_core::dense::sym_eigen;
use cliquesdp_core::{ConeSpec, ConicProblem, DataEntry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Error;

/// Block-arrow pattern: `l` diagonal blocks of size `d` plus an arrow head
/// of width `h` coupled to everything. Cone side `n = l·d + h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockArrowSpec {
    pub l: usize,
    pub d: usize,
    pub h: usize,
    pub m: usize,
    pub seed: u64,
}

impl BlockArrowSpec {
    pub fn n(&self) -> usize {
        self.l * self.d + self.h
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.l == 0 || self.d == 0 || self.m == 0 {
            return Err(Error::InvalidSpec(format!(
                "block-arrow needs at least one block, block size and constraint (got l={}, d={}, m={})",
                self.l, self.d, self.m
            )));
        }
        Ok(())
    }

    /// Upper-triangle positions of the pattern, row by row.
    pub fn pattern(&self) -> Vec<(usize, usize)> {
        let (n, head) = (self.n(), self.l * self.d);
        let mut out = Vec::new();
        for i in 0..n {
            if i < head {
                let end = (i / self.d + 1) * self.d;
                out.extend((i..end).map(|j| (i, j)));
                out.extend((head..n).map(|j| (i, j)));
            } else {
                out.extend((i..n).map(|j| (i, j)));
            }
        }
        out
    }
}

pub fn gen_block_arrow(spec: &BlockArrowSpec) -> Result<ConicProblem, Error> {
    spec.validate()?;
    let pattern = spec.pattern();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(feasible_problem(spec.n(), &pattern, spec.m, &mut rng, |w| arrow_min_eig(spec, w)))
}

/// Random chordal pattern: the intersection graph of `n` random subtrees of
/// a random tree on `n` nodes, each grown by up to `spread` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomChordalSpec {
    pub n: usize,
    pub m: usize,
    pub spread: usize,
    pub seed: u64,
}

impl RandomChordalSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidSpec(format!("random-chordal needs n ≥ 1 and m ≥ 1 (got n={}, m={})", self.n, self.m)));
        }
        Ok(())
    }
}

/// Random problem on a random chordal pattern. The pattern is drawn first
/// from the same generator, then the data as described in the module docs.
/// `λ_min(W)` is computed densely, so this is meant for moderate `n`.
pub fn gen_random_chordal(spec: &RandomChordalSpec) -> Result<ConicProblem, Error> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let edges = random_chordal_edges(n, spec.spread, &mut rng);
    let mut pattern: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).chain(edges).collect();
    pattern.sort_unstable();
    let min_eig = |w: &[f64]| {
        let mut dense = vec![0.0; n * n];
        for (&(i, j), &v) in pattern.iter().zip(w) {
            dense[i * n + j] = v;
            dense[j * n + i] = v;
        }
        sym_eigen(&dense, n).map(|e| e.values[0]).unwrap_or_else(|_| -gershgorin_radius(n, &pattern, w))
    };
    Ok(feasible_problem(n, &pattern, spec.m, &mut rng, min_eig))
}

pub fn random_chordal_edges(n: usize, spread: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut tree: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 1..n {
        let p = rng.random_range(0..v);
        tree[v].push(p);
        tree[p].push(v);
    }
    // members[t] = vertices whose subtree contains tree node t
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let start = rng.random_range(0..n);
        let mut nodes = vec![start];
        for _ in 0..spread {
            let from = nodes[rng.random_range(0..nodes.len())];
            if tree[from].is_empty() {
                break;
            }
            let to = tree[from][rng.random_range(0..tree[from].len())];
            if !nodes.contains(&to) {
                nodes.push(to);
            }
        }
        for t in nodes {
            members[t].push(v);
        }
    }
    let mut edges = BTreeSet::new();
    for group in &members {
        for (a, &u) in group.iter().enumerate() {
            for &v in &group[a + 1..] {
                edges.insert((u.min(v), u.max(v)));
            }
        }
    }
    edges.into_iter().collect()
}

/// Largest absolute row sum of the symmetric matrix; bounds every `|λ|`.
fn gershgorin_radius(n: usize, pattern: &[(usize, usize)], w: &[f64]) -> f64 {
    let mut r = vec![0.0f64; n];
    for (&(i, j), &v) in pattern.iter().zip(w) {
        r[i] += v.abs();
        if i != j {
            r[j] += v.abs();
        }
    }
    r.into_iter().fold(0.0, f64::max)
}

fn feasible_problem(
    n: usize,
    pattern: &[(usize, usize)],
    m: usize,
    rng: &mut ChaCha8Rng,
    min_eig: impl Fn(&[f64]) -> f64,
) -> ConicProblem {
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { pattern.iter().map(|_| rng.random::<f64>()).collect() };
    let diag_shift = |w: &mut [f64]| {
        let alpha = min_eig(w).abs() + 1.0;
        for (&(i, j), v) in pattern.iter().zip(w.iter_mut()) {
            if i == j {
                *v += alpha;
            }
        }
    };
    let mut xf = draw(rng);
    diag_shift(&mut xf);
    let mut c = draw(rng);
    diag_shift(&mut c);
    let y: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();

    let mut entries = Vec::with_capacity((m + 1) * pattern.len());
    let mut b = Vec::with_capacity(m);
    for (k, &yk) in y.iter().enumerate() {
        let mut bk = 0.0;
        for (t, &(i, j)) in pattern.iter().enumerate() {
            let a = rng.random::<f64>();
            bk += if i == j { a * xf[t] } else { 2.0 * a * xf[t] };
            c[t] += yk * a;
            entries.push(DataEntry { mat: k + 1, block: 0, i, j, value: a });
        }
        b.push(bk);
    }
    entries.extend(pattern.iter().zip(&c).map(|(&(i, j), &value)| DataEntry { mat: 0, block: 0, i, j, value }));
    ConicProblem::new(vec![ConeSpec::Psd(n)], entries, b)
}

/// Number of eigenvalues of `A` below zero from an `LDLᵀ` factorization
/// without pivoting of the row-major `a` (overwritten by `L` and `D`).
/// Exact zero pivots are nudged, which is harmless for bisection.
fn ldl_negatives(a: &mut [f64], n: usize) -> usize {
    let mut neg = 0;
    for k in 0..n {
        let mut dk = a[k * n + k];
        for p in 0..k {
            dk -= a[k * n + p] * a[k * n + p] * a[p * n + p];
        }
        if dk == 0.0 {
            dk = f64::MIN_POSITIVE.sqrt();
        }
        a[k * n + k] = dk;
        if dk < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let mut v = a[i * n + k];
            for p in 0..k {
                v -= a[i * n + p] * a[k * n + p] * a[p * n + p];
            }
            a[i * n + k] = v / dk;
        }
    }
    neg
}

/// Values of a block-arrow matrix split into diagonal blocks, coupling
/// blocks and head.
struct Arrow {
    l: usize,
    d: usize,
    h: usize,
    /// `l` row-major `d × d` blocks.
    blocks: Vec<f64>,
    /// `l` row-major `d × h` blocks.
    coupling: Vec<f64>,
    head: Vec<f64>,
}

impl Arrow {
    fn new(spec: &BlockArrowSpec, w: &[f64]) -> Self {
        let (l, d, h) = (spec.l, spec.d, spec.h);
        let head0 = l * d;
        let mut a = Arrow { l, d, h, blocks: vec![0.0; l * d * d], coupling: vec![0.0; l * d * h], head: vec![0.0; h * h] };
        for (&(i, j), &v) in spec.pattern().iter().zip(w) {
            if j < head0 {
                let (k, r, c) = (i / d, i % d, j % d);
                a.blocks[k * d * d + r * d + c] = v;
                a.blocks[k * d * d + c * d + r] = v;
            } else if i < head0 {
                let (k, r) = (i / d, i % d);
                a.coupling[k * d * h + r * h + (j - head0)] = v;
            } else {
                let (r, c) = (i - head0, j - head0);
                a.head[r * h + c] = v;
                a.head[c * h + r] = v;
            }
        }
        a
    }

    /// Eigenvalues below `sigma`, by Sylvester's law of inertia on the
    /// block elimination of `A − σI`: the diagonal blocks first, then the
    /// Schur complement on the head.
    fn count_below(&self, sigma: f64) -> usize {
        let (d, h) = (self.d, self.h);
        let mut neg = 0;
        let mut schur = self.head.clone();
        for i in 0..h {
            schur[i * h + i] -= sigma;
        }
        let mut blk = vec![0.0; d * d];
        let mut g = vec![0.0; d * h];
        for k in 0..self.l {
            blk.copy_from_slice(&self.blocks[k * d * d..(k + 1) * d * d]);
            for i in 0..d {
                blk[i * d + i] -= sigma;
            }
            neg += ldl_negatives(&mut blk, d);
            if h == 0 {
                continue;
            }
            // G = L⁻¹ E, then S −= Gᵀ D⁻¹ G
            g.copy_from_slice(&self.coupling[k * d * h..(k + 1) * d * h]);
            for r in 0..d {
                for p in 0..r {
                    let f = blk[r * d + p];
                    if f != 0.0 {
                        for c in 0..h {
                            g[r * h + c] -= f * g[p * h + c];
                        }
                    }
                }
            }
            for r in 0..d {
                let inv = 1.0 / blk[r * d + r];
                for a in 0..h {
                    let ga = g[r * h + a] * inv;
                    for b in 0..h {
                        schur[a * h + b] -= ga * g[r * h + b];
                    }
                }
            }
        }
        neg + ldl_negatives(&mut schur, h)
    }
}

/// Smallest eigenvalue of the symmetric block-arrow matrix whose upper
/// triangle holds `w` in [`BlockArrowSpec::pattern`] order, by bisection on
/// the inertia count.
pub fn arrow_min_eig(spec: &BlockArrowSpec, w: &[f64]) -> f64 {
    let arrow = Arrow::new(spec, w);
    let pattern = spec.pattern();
    let n = spec.n();
    let r = gershgorin_radius(n, &pattern, w);
    let (mut lo, mut hi) = (-r - 1.0, r + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if arrow.count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_size() {
        let s = BlockArrowSpec { l: 3, d: 4, h: 2, m: 1, seed: 0 };
        // blocks d(d+1)/2 each, coupling l·d·h, head h(h+1)/2
        assert_eq!(s.pattern().len(), 3 * 10 + 3 * 4 * 2 + 3);
        assert!(s.pattern().iter().all(|&(i, j)| i <= j && j < s.n()));
    }

    #[test]
    fn ldl_inertia_of_diagonal() {
        let mut a = vec![2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -3.0];
        assert_eq!(ldl_negatives(&mut a, 3), 2);
    }

    #[test]
    fn invalid_specs() {
        assert!(gen_block_arrow(&BlockArrowSpec { l: 0, d: 2, h: 1, m: 1, seed: 0 }).is_err());
        assert!(gen_block_arrow(&BlockArrowSpec { l: 1, d: 2, h: 1, m: 0, seed: 0 }).is_err());
        assert!(gen_random_chordal(&RandomChordalSpec { n: 0, m: 1, spread: 1, seed: 0 }).is_err());
    }
}
