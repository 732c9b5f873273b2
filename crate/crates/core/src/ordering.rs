//! Minimum-degree fill-reducing ordering and the elimination game.
//!
//! The degree is exact (computed on the explicit elimination graph), not the
//! approximate quotient-graph bound. Ties are broken by the lower vertex index,
//! so results are deterministic.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

/// Result of eliminating a graph in a given order.
#[derive(Debug, Clone)]
pub struct Elimination {
    /// `order[k]` is the vertex eliminated at step `k`.
    pub order: Vec<usize>,
    /// Neighbours of each vertex (original labels, sorted) that were still
    /// uneliminated when it was eliminated; these are the fill-in edges plus
    /// the original edges towards later vertices.
    pub later: Vec<Vec<usize>>,
}

impl Elimination {
    /// Inverse permutation: `position[v]` is the step at which `v` goes.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (k, &v) in self.order.iter().enumerate() {
            pos[v] = k;
        }
        pos
    }

    /// Below-diagonal column patterns of the Cholesky factor in permuted
    /// indexing, as required by [`crate::sparse::SparseCholesky::factor`].
    pub fn factor_pattern(&self) -> Vec<Vec<usize>> {
        let pos = self.positions();
        self.order
            .iter()
            .map(|&v| {
                let mut col: Vec<usize> = self.later[v].iter().map(|&u| pos[u]).collect();
                col.sort_unstable();
                col
            })
            .collect()
    }

    pub fn fill_nnz(&self) -> usize {
        self.later.iter().map(Vec::len).sum()
    }
}

fn merge_into(dst: &mut Vec<usize>, src: &[usize], skip: usize, own: usize, scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut a, mut b) = (0, 0);
    while a < dst.len() || b < src.len() {
        let next = if b >= src.len() || (a < dst.len() && dst[a] < src[b]) {
            a += 1;
            dst[a - 1]
        } else if a >= dst.len() || src[b] < dst[a] {
            b += 1;
            src[b - 1]
        } else {
            a += 1;
            b += 1;
            dst[a - 1]
        };
        if next != skip && next != own {
            scratch.push(next);
        }
    }
    core::mem::swap(dst, scratch);
}

/// Minimum-degree elimination of the graph with sorted adjacency lists `adj`
/// (no self loops).
pub fn minimum_degree(adj: &[Vec<usize>]) -> Elimination {
    let n = adj.len();
    let mut g: Vec<Vec<usize>> = adj.to_vec();
    let mut eliminated = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|v| Reverse((g[v].len(), v))).collect();
    let mut order = Vec::with_capacity(n);
    let mut later = vec![Vec::new(); n];
    let mut scratch = Vec::new();
    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || deg != g[v].len() {
            continue;
        }
        eliminated[v] = true;
        order.push(v);
        let nbrs = core::mem::take(&mut g[v]);
        for &u in &nbrs {
            merge_into(&mut g[u], &nbrs, v, u, &mut scratch);
            heap.push(Reverse((g[u].len(), u)));
        }
        later[v] = nbrs;
    }
    Elimination { order, later }
}

/// Elimination game for a fixed order (`order[k]` eliminated at step `k`).
pub fn eliminate_in_order(adj: &[Vec<usize>], order: &[usize]) -> Elimination {
    let n = adj.len();
    let mut g: Vec<Vec<usize>> = adj.to_vec();
    let mut later = vec![Vec::new(); n];
    let mut scratch = Vec::new();
    for &v in order {
        let nbrs = core::mem::take(&mut g[v]);
        for &u in &nbrs {
            merge_into(&mut g[u], &nbrs, v, u, &mut scratch);
        }
        later[v] = nbrs;
    }
    Elimination { order: order.to_vec(), later }
}
