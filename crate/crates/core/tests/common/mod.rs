//! Independent oracles shared by the integration tests. Nothing here calls
//! into the algorithms under test; the dense assemblies below only read the
//! data fields of a decomposed problem.
#![allow(dead_code)]

use std::f64::consts::SQRT_2;

use cliquesdp_core::{ConeSpec, ConicProblem, DataEntry, DecomposedProblem, SparsityPattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_edges(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                e.push((i, j));
            }
        }
    }
    e
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for &(i, j) in edges {
        a[i][j] = true;
        a[j][i] = true;
    }
    a
}

pub fn pattern_adjacency(g: &SparsityPattern) -> Vec<Vec<bool>> {
    let n = g.n();
    let e: Vec<_> = g.edges().collect();
    adjacency(n, &e)
}

/// Chordal graph as the intersection graph of random subtrees of a random
/// tree; every chordal graph arises this way.
pub fn random_chordal(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let t = rng.random_range(1..=n.max(1));
    let mut tree_adj = vec![Vec::new(); t];
    for v in 1..t {
        let p = rng.random_range(0..v);
        tree_adj[v].push(p);
        tree_adj[p].push(v);
    }
    let mut subtrees: Vec<Vec<bool>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut inside = vec![false; t];
        let start = rng.random_range(0..t);
        inside[start] = true;
        let mut members = vec![start];
        let grow = rng.random_range(0..t.min(4));
        for _ in 0..grow {
            let from = members[rng.random_range(0..members.len())];
            let nb = &tree_adj[from];
            if nb.is_empty() {
                break;
            }
            let to = nb[rng.random_range(0..nb.len())];
            if !inside[to] {
                inside[to] = true;
                members.push(to);
            }
        }
        subtrees.push(inside);
    }
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if (0..t).any(|k| subtrees[i][k] && subtrees[j][k]) {
                e.push((i, j));
            }
        }
    }
    e
}

/// All maximal cliques by Bron–Kerbosch with pivoting, each sorted, list
/// sorted.
pub fn bron_kerbosch(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    fn rec(adj: &[Vec<bool>], r: &mut Vec<usize>, p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            let mut c = r.clone();
            c.sort_unstable();
            out.push(c);
            return;
        }
        let pivot = *p.iter().chain(x.iter()).max_by_key(|&&u| p.iter().filter(|&&v| adj[u][v]).count()).unwrap();
        let cand: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
        let mut p = p;
        for v in cand {
            r.push(v);
            let np = p.iter().copied().filter(|&w| adj[v][w]).collect();
            let nx = x.iter().copied().filter(|&w| adj[v][w]).collect();
            rec(adj, r, np, nx, out);
            r.pop();
            p.retain(|&w| w != v);
            x.push(v);
        }
    }
    let n = adj.len();
    let mut out = Vec::new();
    rec(adj, &mut Vec::new(), (0..n).collect(), Vec::new(), &mut out);
    out.sort();
    out
}

/// Chordality by searching every vertex subset for an induced cycle of
/// length at least four (only sensible for small `n`).
pub fn has_chordless_cycle(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    for mask in 0u32..(1 << n) {
        let verts: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if verts.len() < 4 {
            continue;
        }
        // induced cycle: connected and every vertex has induced degree 2
        if verts.iter().any(|&v| verts.iter().filter(|&&w| adj[v][w]).count() != 2) {
            continue;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![verts[0]];
        seen[verts[0]] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &verts {
                if adj[v][w] && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count == verts.len() {
            return true;
        }
    }
    false
}

/// Chordality by repeatedly deleting a simplicial vertex.
pub fn chordal_by_simplicial(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    let mut alive = vec![true; n];
    for _ in 0..n {
        let found = (0..n).find(|&v| {
            if !alive[v] {
                return false;
            }
            let nb: Vec<usize> = (0..n).filter(|&w| alive[w] && adj[v][w]).collect();
            nb.iter().all(|&a| nb.iter().all(|&b| a == b || adj[a][b]))
        });
        match found {
            Some(v) => alive[v] = false,
            None => return false,
        }
    }
    true
}

/// Cyclic Jacobi eigenvalue method on a row-major symmetric matrix.
/// Returns eigenvalues and row-major eigenvectors (column k = vector k).
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| m[i * n + j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i * n + i]).collect(), v)
}

pub fn min_eig(a: &[f64], n: usize) -> f64 {
    jacobi_eigen(a, n).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// Gaussian elimination with partial pivoting on a dense row-major system.
pub fn lu_solve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs())).unwrap();
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            if f != 0.0 {
                for c in k..n {
                    m[i * n + c] -= f * m[k * n + c];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for c in k + 1..n {
            acc -= m[k * n + c] * x[c];
        }
        x[k] = acc / m[k * n + k];
    }
    x
}

pub fn matvec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows).map(|i| (0..cols).map(|j| a[i * cols + j] * x[j]).sum()).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Random dense PSD matrix `G Gᵀ` (row-major), with `G` of `rank` columns.
pub fn random_psd(n: usize, rank: usize, rng: &mut impl Rng) -> Vec<f64> {
    let g: Vec<f64> = (0..n * rank).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (0..rank).map(|k| g[i * rank + k] * g[j * rank + k]).sum();
        }
    }
    m
}

/// Single-PSD-block problem whose aggregate pattern is exactly `edges`.
/// `m` random constraints supported on the pattern (first one is the trace).
pub fn problem_on_pattern(n: usize, edges: &[(usize, usize)], m: usize, rng: &mut impl Rng) -> ConicProblem {
    let mut entries = Vec::new();
    for i in 0..n {
        entries.push(DataEntry { mat: 0, block: 0, i, j: i, value: 1.0 + rng.random::<f64>() });
        entries.push(DataEntry { mat: 1, block: 0, i, j: i, value: 1.0 });
    }
    for &(i, j) in edges {
        entries.push(DataEntry { mat: 0, block: 0, i, j, value: rng.random::<f64>() - 0.5 });
    }
    for k in 2..=m {
        // one guaranteed diagonal entry keeps every row nonzero
        let forced = rng.random_range(0..n);
        entries.push(DataEntry { mat: k, block: 0, i: forced, j: forced, value: rng.random::<f64>() + 0.5 });
        for i in 0..n {
            if i != forced && rng.random::<f64>() < 0.5 {
                entries.push(DataEntry { mat: k, block: 0, i, j: i, value: rng.random::<f64>() - 0.5 });
            }
        }
        for &(i, j) in edges {
            if rng.random::<f64>() < 0.5 {
                entries.push(DataEntry { mat: k, block: 0, i, j, value: rng.random::<f64>() - 0.5 });
            }
        }
    }
    let b = (0..m).map(|k| if k == 0 { n as f64 } else { rng.random::<f64>() - 0.5 }).collect();
    ConicProblem::new(vec![ConeSpec::Psd(n)], entries, b)
}

/// Relative difference `‖a − b‖ / max(1, ‖b‖)`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b)) / norm(b).max(1.0)
}

/// Reduced coordinates of a dense row-major matrix on the PSD cone `q`.
pub fn reduce(dp: &DecomposedProblem, q: usize, m: &[f64]) -> Vec<f64> {
    let n = dp.psd[q].layout.n;
    let mut x = vec![0.0; dp.n_x];
    let off = dp.psd[q].x_offset;
    for (p, (i, j)) in dp.psd[q].layout.entries().enumerate() {
        x[off + p] = if i == j { m[i * n + j] } else { SQRT_2 * m[i * n + j] };
    }
    x
}

/// Dense matrix of the reduced coordinates (zeros outside the pattern).
pub fn expand(dp: &DecomposedProblem, q: usize, x: &[f64]) -> Vec<f64> {
    let n = dp.psd[q].layout.n;
    let mut m = vec![0.0; n * n];
    let off = dp.psd[q].x_offset;
    for (p, (i, j)) in dp.psd[q].layout.entries().enumerate() {
        let v = if i == j { x[off + p] } else { x[off + p] / SQRT_2 };
        m[i * n + j] = v;
        m[j * n + i] = v;
    }
    m
}

pub fn dense_h(dp: &DecomposedProblem) -> Vec<f64> {
    let mut h = vec![0.0; dp.nd * dp.n_x];
    for blk in &dp.blocks {
        for (t, (&j, &w)) in blk.idx.iter().zip(&blk.weight).enumerate() {
            h[(blk.offset + t) * dp.n_x + j] += w;
        }
    }
    h
}

/// `Q` of the embedding for `u = (x, s, y, t, τ)`.
pub fn dense_q(dp: &DecomposedProblem) -> Vec<f64> {
    let (n, nd, m) = (dp.n_x, dp.nd, dp.m);
    let l = n + 2 * nd + m + 1;
    let (s0, y0, t0, tau) = (n, n + nd, n + nd + m, l - 1);
    let a = dp.a.to_dense();
    let h = dense_h(dp);
    let mut q = vec![0.0; l * l];
    let mut put = |i: usize, j: usize, v: f64| {
        q[i * l + j] += v;
        q[j * l + i] -= v;
    };
    for i in 0..m {
        for j in 0..n {
            put(y0 + i, j, a[i * n + j]);
        }
        put(tau, y0 + i, dp.b[i]);
    }
    for k in 0..nd {
        for j in 0..n {
            if h[k * n + j] != 0.0 {
                put(t0 + k, j, h[k * n + j]);
            }
        }
        put(t0 + k, s0 + k, -1.0);
    }
    for j in 0..n {
        put(j, tau, dp.c[j]);
    }
    q
}

/// The saddle-point matrix `[D Aᵀ; A 0]` of the primal-dual step.
pub fn dense_saddle(dp: &DecomposedProblem) -> Vec<f64> {
    let (n, m) = (dp.n_x, dp.m);
    let a = dp.a.to_dense();
    let sz = n + m;
    let mut kmat = vec![0.0; sz * sz];
    for j in 0..n {
        kmat[j * sz + j] = dp.d[j];
    }
    for i in 0..m {
        for j in 0..n {
            kmat[(n + i) * sz + j] = a[i * n + j];
            kmat[j * sz + n + i] = a[i * n + j];
        }
    }
    kmat
}
