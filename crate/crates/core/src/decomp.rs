//! Conversion of a block conic problem into clique-decomposed form.
//!
//! Every cone block is represented in reduced coordinates `x`:
//!
//! * scalar blocks (free / nonnegative) contribute one coordinate per scalar,
//! * a PSD block contributes the upper-triangular entries of the chordal
//!   extension of its aggregate sparsity pattern, in `svec` scaling.
//!
//! The stacked clique vector `s` holds one piece per cone block of the
//! decomposed problem: each scalar block passes through unchanged, each PSD
//! block becomes one PSD piece per maximal clique. Entry selectors map `x`
//! to each piece; since `svec` is used on both sides the selectors are pure
//! index maps, with a per-entry weight that stays `1` until the data are
//! rescaled.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::dense::svec_len;
use crate::error::Error;
use crate::pattern::{CliqueDecomposition, SparsityPattern, SvecLayout};
use crate::problem::{ConeSpec, ConicProblem};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Free,
    NonNeg,
    /// PSD clique block; `dim` of the owning [`SBlock`] is the clique size.
    Psd,
}

/// One piece of the stacked clique vector `s` together with its selector.
#[derive(Debug, Clone, PartialEq)]
pub struct SBlock {
    pub kind: BlockKind,
    /// Scalar count, or side length of the PSD block.
    pub dim: usize,
    /// Start of this piece inside `s`.
    pub offset: usize,
    /// Reduced coordinate selected by each entry of the piece.
    pub idx: Vec<usize>,
    /// Selector weight of each entry (`s_t = weight_t · x[idx_t]`).
    pub weight: Vec<f64>,
}

impl SBlock {
    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn range(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + self.idx.len()
    }
}

/// Decomposition data of one PSD cone of the original problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdBlockInfo {
    /// Index into the original cone list.
    pub cone: usize,
    /// Start of this cone inside `x`.
    pub x_offset: usize,
    pub aggregate: SparsityPattern,
    pub extension: SparsityPattern,
    pub layout: SvecLayout,
    pub cliques: CliqueDecomposition,
    /// Index of the first clique block in [`DecomposedProblem::blocks`].
    pub first_block: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedProblem {
    pub base: ConicProblem,
    /// Reduced dimension `N`.
    pub n_x: usize,
    pub m: usize,
    /// Constraint matrix in reduced coordinates (`m × N`).
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub blocks: Vec<SBlock>,
    /// Length of the stacked clique vector.
    pub nd: usize,
    /// `D = Σ_k H_kᵀ H_k` (diagonal).
    pub d: Vec<f64>,
    /// Start of each original cone inside `x`.
    pub cone_offsets: Vec<usize>,
    pub psd: Vec<PsdBlockInfo>,
}

/// Union of the off-diagonal supports of `C` and all `A_i` inside PSD block
/// `block`.
pub fn aggregate_pattern(problem: &ConicProblem, block: usize) -> Result<SparsityPattern, Error> {
    let side = match problem.cones.get(block) {
        Some(ConeSpec::Psd(n)) => *n,
        Some(_) => return Err(Error::InvalidProblem("aggregate pattern requested for a scalar block")),
        None => return Err(Error::IndexOutOfRange { index: block, len: problem.cones.len() }),
    };
    let edges: Vec<(usize, usize)> = problem
        .entries
        .iter()
        .filter(|e| e.block == block && e.i != e.j && e.value != 0.0)
        .map(|e| (e.i, e.j))
        .collect();
    SparsityPattern::from_edges(side, &edges)
}

/// Build the decomposed problem: chordal extension and maximal cliques per
/// PSD block, selector maps, `D`, and the data in reduced coordinates.
pub fn decompose(problem: &ConicProblem) -> Result<DecomposedProblem, Error> {
    problem.validate()?;
    let m = problem.m();
    let mut cone_offsets = Vec::with_capacity(problem.cones.len());
    let mut layouts: Vec<Option<SvecLayout>> = Vec::with_capacity(problem.cones.len());
    let mut blocks = Vec::new();
    let mut psd = Vec::new();
    let mut n_x = 0usize;
    let mut nd = 0usize;

    for (cone_idx, cone) in problem.cones.iter().enumerate() {
        cone_offsets.push(n_x);
        match *cone {
            ConeSpec::Free(n) | ConeSpec::NonNeg(n) => {
                let kind = if matches!(cone, ConeSpec::Free(_)) { BlockKind::Free } else { BlockKind::NonNeg };
                if n > 0 {
                    blocks.push(SBlock {
                        kind,
                        dim: n,
                        offset: nd,
                        idx: (n_x..n_x + n).collect(),
                        weight: vec![1.0; n],
                    });
                }
                nd += n;
                n_x += n;
                layouts.push(None);
            }
            ConeSpec::Psd(_) => {
                let aggregate = aggregate_pattern(problem, cone_idx)?;
                let extension = aggregate.chordal_extend();
                let cliques = extension.maximal_cliques()?;
                let layout = SvecLayout::new(&extension);
                let first_block = blocks.len();
                for clique in &cliques.cliques {
                    let d = clique.len();
                    let mut idx = Vec::with_capacity(svec_len(d));
                    for bcol in 0..d {
                        for arow in 0..=bcol {
                            let pos = layout
                                .index(clique[arow], clique[bcol])
                                .ok_or(Error::InvalidProblem("clique entry outside the extended pattern"))?;
                            idx.push(n_x + pos);
                        }
                    }
                    let len = idx.len();
                    blocks.push(SBlock { kind: BlockKind::Psd, dim: d, offset: nd, idx, weight: vec![1.0; len] });
                    nd += len;
                }
                psd.push(PsdBlockInfo {
                    cone: cone_idx,
                    x_offset: n_x,
                    aggregate,
                    extension,
                    layout: layout.clone(),
                    cliques,
                    first_block,
                });
                n_x += layout.len();
                layouts.push(Some(layout));
            }
        }
    }
    if m == 0 || n_x == 0 {
        return Err(Error::EmptyProblem);
    }

    let mut c = vec![0.0; n_x];
    let mut triplets = Vec::new();
    for e in problem.entries.iter().filter(|e| e.value != 0.0) {
        let off = cone_offsets[e.block];
        let (pos, value) = match &layouts[e.block] {
            None => (off + e.i, e.value),
            Some(layout) => {
                let p = layout.index(e.i, e.j).ok_or(Error::InvalidProblem("entry outside aggregate pattern"))?;
                let v = if e.i == e.j { e.value } else { SQRT_2 * e.value };
                (off + p, v)
            }
        };
        if e.mat == 0 {
            c[pos] += value;
        } else {
            triplets.push((e.mat - 1, pos, value));
        }
    }
    let a = CsrMatrix::from_triplets(m, n_x, &triplets)?;

    let mut dp = DecomposedProblem {
        base: problem.clone(),
        n_x,
        m,
        a,
        b: problem.b.clone(),
        c,
        blocks,
        nd,
        d: Vec::new(),
        cone_offsets,
        psd,
    };
    dp.recompute_d();
    Ok(dp)
}

impl DecomposedProblem {
    /// Recompute `D` from the selector weights.
    pub fn recompute_d(&mut self) {
        let mut d = vec![0.0; self.n_x];
        for blk in &self.blocks {
            for (&j, &w) in blk.idx.iter().zip(&blk.weight) {
                d[j] += w * w;
            }
        }
        self.d = d;
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Number of PSD clique blocks over all PSD cones.
    pub fn num_cliques(&self) -> usize {
        self.psd.iter().map(|p| p.cliques.len()).sum()
    }

    /// Sizes of all PSD clique blocks.
    pub fn clique_sizes(&self) -> Vec<usize> {
        self.blocks.iter().filter(|b| b.kind == BlockKind::Psd).map(|b| b.dim).collect()
    }

    /// Vectorized size of each piece of `s`.
    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(SBlock::len).collect()
    }

    /// `out = H_k x`
    pub fn select(&self, k: usize, x: &[f64], out: &mut [f64]) -> Result<(), Error> {
        let blk = self.blocks.get(k).ok_or(Error::IndexOutOfRange { index: k, len: self.blocks.len() })?;
        if x.len() != self.n_x {
            return Err(Error::DimensionMismatch { expected: self.n_x, got: x.len() });
        }
        if out.len() != blk.len() {
            return Err(Error::DimensionMismatch { expected: blk.len(), got: out.len() });
        }
        for ((o, &j), &w) in out.iter_mut().zip(&blk.idx).zip(&blk.weight) {
            *o = w * x[j];
        }
        Ok(())
    }

    /// `accum += H_kᵀ y`
    pub fn scatter_add(&self, k: usize, y: &[f64], accum: &mut [f64]) -> Result<(), Error> {
        let blk = self.blocks.get(k).ok_or(Error::IndexOutOfRange { index: k, len: self.blocks.len() })?;
        if accum.len() != self.n_x {
            return Err(Error::DimensionMismatch { expected: self.n_x, got: accum.len() });
        }
        if y.len() != blk.len() {
            return Err(Error::DimensionMismatch { expected: blk.len(), got: y.len() });
        }
        for ((&v, &j), &w) in y.iter().zip(&blk.idx).zip(&blk.weight) {
            accum[j] += w * v;
        }
        Ok(())
    }

    /// `s = H x` over all pieces.
    pub fn apply_h(&self, x: &[f64], s: &mut [f64]) {
        debug_assert_eq!(s.len(), self.nd);
        for blk in &self.blocks {
            let out = &mut s[blk.range()];
            for ((o, &j), &w) in out.iter_mut().zip(&blk.idx).zip(&blk.weight) {
                *o = w * x[j];
            }
        }
    }

    /// `x += alpha · Hᵀ s`
    pub fn apply_ht_add(&self, alpha: f64, s: &[f64], x: &mut [f64]) {
        debug_assert_eq!(s.len(), self.nd);
        for blk in &self.blocks {
            let piece = &s[blk.range()];
            for ((&v, &j), &w) in piece.iter().zip(&blk.idx).zip(&blk.weight) {
                x[j] += alpha * w * v;
            }
        }
    }

    /// Slice of `x` belonging to the `q`-th PSD cone.
    pub fn psd_slice<'a>(&self, q: usize, x: &'a [f64]) -> &'a [f64] {
        let info = &self.psd[q];
        &x[info.x_offset..info.x_offset + info.layout.len()]
    }

    /// Matrix-space value `⟨M, X⟩` of reduced coordinates is the plain dot
    /// product; this maps an original-space entry to its coordinate.
    pub fn coordinate(&self, block: usize, i: usize, j: usize) -> Option<usize> {
        let off = *self.cone_offsets.get(block)?;
        match self.base.cones[block] {
            ConeSpec::Free(n) | ConeSpec::NonNeg(n) => (i == j && i < n).then_some(off + i),
            ConeSpec::Psd(_) => {
                let info = self.psd.iter().find(|p| p.cone == block)?;
                info.layout.index(i, j).map(|p| off + p)
            }
        }
    }
}
