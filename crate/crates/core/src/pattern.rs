//! Sparsity patterns as undirected graphs: chordality, chordal extension,
//! maximal cliques and clique trees.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::ordering;

/// Undirected graph on `0..n` with implicit self loops.
///
/// Adjacency lists are kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl SparsityPattern {
    pub fn new(n: usize) -> Self {
        Self { n, adj: vec![Vec::new(); n] }
    }

    /// Build from unordered pairs; self loops are ignored, duplicates merged.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, Error> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n {
                return Err(Error::IndexOutOfRange { index: a, len: n });
            }
            if b >= n {
                return Err(Error::IndexOutOfRange { index: b, len: n });
            }
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        Ok(Self { n, adj })
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let adj = (0..n).map(|v| (0..n).filter(|&u| u != v).collect()).collect();
        Self { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a == b || self.adj[a].binary_search(&b).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, ordered by `i` then `j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn contains(&self, other: &SparsityPattern) -> bool {
        self.n == other.n && other.edges().all(|(i, j)| self.has_edge(i, j))
    }

    /// Maximum cardinality search. Returns the visit order; its reverse is a
    /// perfect elimination ordering when the graph is chordal.
    pub fn mcs_order(&self) -> Vec<usize> {
        let n = self.n;
        let mut weight = vec![0usize; n];
        let mut numbered = vec![false; n];
        // buckets of vertices by weight, with lazy deletion
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for v in (0..n).rev() {
            buckets[0].push(v);
        }
        let mut top = 0usize;
        let mut visit = Vec::with_capacity(n);
        while visit.len() < n {
            let v = loop {
                match buckets[top].pop() {
                    Some(v) if !numbered[v] && weight[v] == top => break v,
                    Some(_) => {}
                    None => top -= 1,
                }
            };
            numbered[v] = true;
            visit.push(v);
            for &u in &self.adj[v] {
                if !numbered[u] {
                    weight[u] += 1;
                    buckets[weight[u]].push(u);
                    if weight[u] > top {
                        top = weight[u];
                    }
                }
            }
        }
        visit
    }

    /// Perfect elimination ordering if the graph is chordal.
    pub fn perfect_elimination_order(&self) -> Option<Vec<usize>> {
        let mut order = self.mcs_order();
        order.reverse();
        if self.is_peo(&order) {
            Some(order)
        } else {
            None
        }
    }

    fn is_peo(&self, order: &[usize]) -> bool {
        let n = self.n;
        let mut pos = vec![0usize; n];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        let mut mark = vec![usize::MAX; n];
        for &v in order {
            // first later neighbour p; every other later neighbour must be adjacent to p
            let p = self.adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).min_by_key(|&u| pos[u]);
            let Some(p) = p else { continue };
            for &w in &self.adj[p] {
                mark[w] = p;
            }
            for &u in &self.adj[v] {
                if pos[u] > pos[v] && u != p && mark[u] != p {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_chordal(&self) -> bool {
        self.perfect_elimination_order().is_some()
    }

    /// Chordal supergraph. Chordal inputs are returned unchanged; otherwise
    /// the filled graph of a minimum-degree elimination.
    pub fn chordal_extend(&self) -> SparsityPattern {
        if self.is_chordal() {
            return self.clone();
        }
        let elim = ordering::minimum_degree(&self.adj);
        let mut adj = vec![Vec::new(); self.n];
        for v in 0..self.n {
            for &u in &elim.later[v] {
                adj[v].push(u);
                adj[u].push(v);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        SparsityPattern { n: self.n, adj }
    }

    /// Maximal cliques and a clique tree of a chordal graph.
    pub fn maximal_cliques(&self) -> Result<CliqueDecomposition, Error> {
        let order = self.perfect_elimination_order().ok_or(Error::NotChordal)?;
        let n = self.n;
        let mut pos = vec![0usize; n];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        let later: Vec<Vec<usize>> =
            (0..n).map(|v| self.adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).collect()).collect();
        // K_v = {v} ∪ later(v) is non-maximal iff some w has first follower v
        // and |later(w)| = |later(v)| + 1
        let mut maximal = vec![true; n];
        for w in 0..n {
            if let Some(p) = later[w].iter().copied().min_by_key(|&u| pos[u]) {
                if later[w].len() == later[p].len() + 1 {
                    maximal[p] = false;
                }
            }
        }
        let mut cliques: Vec<Vec<usize>> = (0..n)
            .filter(|&v| maximal[v])
            .map(|v| {
                let mut c = later[v].clone();
                c.push(v);
                c.sort_unstable();
                c
            })
            .collect();
        cliques.sort();
        Ok(CliqueDecomposition::from_cliques(n, cliques))
    }
}

/// Maximal cliques of a chordal pattern arranged as a clique forest.
///
/// Cliques are numbered so that every parent precedes its children; each
/// clique's vertices are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueDecomposition {
    pub n: usize,
    pub cliques: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
}

impl CliqueDecomposition {
    /// Arrange an arbitrary list of maximal cliques into a clique forest by a
    /// maximum-weight spanning tree on the intersection graph.
    pub fn from_cliques(n: usize, cliques: Vec<Vec<usize>>) -> Self {
        let p = cliques.len();
        // pairwise intersection sizes through vertex incidence
        let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, c) in cliques.iter().enumerate() {
            for &v in c {
                containing[v].push(k);
            }
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for list in &containing {
            for a in 0..list.len() {
                for b in a + 1..list.len() {
                    pairs.push((list[a], list[b]));
                }
            }
        }
        pairs.sort_unstable();
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        let mut k = 0;
        while k < pairs.len() {
            let mut e = k;
            while e < pairs.len() && pairs[e] == pairs[k] {
                e += 1;
            }
            edges.push((e - k, pairs[k].0, pairs[k].1));
            k = e;
        }
        // heaviest first, ties by lower clique indices
        edges.sort_unstable_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));

        let mut uf: Vec<usize> = (0..p).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        let mut tree: Vec<Vec<usize>> = vec![Vec::new(); p];
        for &(_, a, b) in &edges {
            let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
            if ra != rb {
                uf[ra] = rb;
                tree[a].push(b);
                tree[b].push(a);
            }
        }
        for l in &mut tree {
            l.sort_unstable();
        }

        // breadth-first numbering from the lowest unvisited clique
        let mut new_index = vec![usize::MAX; p];
        let mut order = Vec::with_capacity(p);
        let mut old_parent = vec![None; p];
        let mut queue = VecDeque::new();
        for root in 0..p {
            if new_index[root] != usize::MAX {
                continue;
            }
            new_index[root] = order.len();
            order.push(root);
            queue.push_back(root);
            while let Some(a) = queue.pop_front() {
                for &b in &tree[a] {
                    if new_index[b] == usize::MAX {
                        new_index[b] = order.len();
                        order.push(b);
                        old_parent[b] = Some(a);
                        queue.push_back(b);
                    }
                }
            }
        }
        let parent = order.iter().map(|&old| old_parent[old].map(|q| new_index[q])).collect();
        let mut cliques = cliques;
        let reordered = order.iter().map(|&old| core::mem::take(&mut cliques[old])).collect();
        Self { n, cliques: reordered, parent }
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn max_clique(&self) -> usize {
        self.cliques.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_clique(&self) -> usize {
        self.cliques.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// `C_k ∩ C_parent(k)` (sorted); empty for roots.
    pub fn separator(&self, k: usize) -> Vec<usize> {
        match self.parent[k] {
            None => Vec::new(),
            Some(q) => intersect_sorted(&self.cliques[k], &self.cliques[q]),
        }
    }

    /// Check the running intersection property: for every clique, its overlap
    /// with all earlier cliques lies inside its parent.
    pub fn has_running_intersection(&self) -> bool {
        let mut seen = vec![false; self.n];
        for (k, c) in self.cliques.iter().enumerate() {
            let overlap: Vec<usize> = c.iter().copied().filter(|&v| seen[v]).collect();
            match self.parent[k] {
                None => {
                    if !overlap.is_empty() {
                        return false;
                    }
                }
                Some(q) => {
                    if q >= k || overlap.iter().any(|v| self.cliques[q].binary_search(v).is_err()) {
                        return false;
                    }
                }
            }
            for &v in c {
                seen[v] = true;
            }
        }
        true
    }
}

pub(crate) fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Column-major upper-triangular coordinates of a symmetric pattern.
///
/// Column `j` holds the rows `i ≤ j` with `(i, j)` in the pattern (the
/// diagonal always included), sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvecLayout {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub rows: Vec<usize>,
}

impl SvecLayout {
    pub fn new(pattern: &SparsityPattern) -> Self {
        let n = pattern.n();
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut rows = Vec::new();
        col_ptr.push(0);
        for j in 0..n {
            rows.extend(pattern.neighbors(j).iter().copied().filter(|&i| i < j));
            rows.push(j);
            col_ptr.push(rows.len());
        }
        Self { n, col_ptr, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Coordinate of entry `(i, j)` (either triangle), if in the pattern.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if j >= self.n {
            return None;
        }
        let col = &self.rows[self.col_ptr[j]..self.col_ptr[j + 1]];
        col.binary_search(&i).ok().map(|p| self.col_ptr[j] + p)
    }

    /// `(i, j)` for every coordinate, in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |j| self.rows[self.col_ptr[j]..self.col_ptr[j + 1]].iter().map(move |&i| (i, j)))
    }
}
