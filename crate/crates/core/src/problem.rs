//! Block-structured conic problem data.
//!
//! The problem is the standard primal/dual pair
//!
//! ```text
//! min ⟨C, X⟩  s.t. ⟨A_i, X⟩ = b_i (i = 1..m),  X ∈ K
//! max bᵀy     s.t. Σ y_i A_i + Z = C,           Z ∈ K*
//! ```
//!
//! where `K` is a product of free, nonnegative and PSD blocks. Data matrices
//! are given as sparse entries in SDPA style: matrix `0` is `C`, matrix `i`
//! is `A_i`; each entry names a block and a position `(i, j)` inside it.

use alloc::vec::Vec;

use crate::error::Error;

/// One block of the cone `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeSpec {
    /// `n` unconstrained scalars.
    Free(usize),
    /// `n` nonnegative scalars.
    NonNeg(usize),
    /// An `n × n` positive semidefinite block.
    Psd(usize),
}

impl ConeSpec {
    pub fn side(&self) -> usize {
        match *self {
            ConeSpec::Free(n) | ConeSpec::NonNeg(n) | ConeSpec::Psd(n) => n,
        }
    }

    pub fn is_psd(&self) -> bool {
        matches!(self, ConeSpec::Psd(_))
    }
}

/// A single nonzero of `C` (`mat == 0`) or `A_mat`.
///
/// Indices are zero-based. For scalar blocks only `i == j` is meaningful.
/// For PSD blocks an entry `(i, j)` with `i ≠ j` sets both symmetric
/// positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataEntry {
    pub mat: usize,
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub cones: Vec<ConeSpec>,
    pub entries: Vec<DataEntry>,
    pub b: Vec<f64>,
    /// Multiplier applied to objective values when reporting them. Readers
    /// that negate the objective to reach the minimization form set this to
    /// `-1` so that reported values match the source convention.
    pub report_sign: f64,
}

impl ConicProblem {
    pub fn new(cones: Vec<ConeSpec>, entries: Vec<DataEntry>, b: Vec<f64>) -> Self {
        Self { cones, entries, b, report_sign: 1.0 }
    }

    /// Number of affine constraints.
    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Check indices and canonicalize entries to the upper triangle.
    pub fn validate(&self) -> Result<(), Error> {
        let m = self.m();
        for e in &self.entries {
            if e.mat > m {
                return Err(Error::IndexOutOfRange { index: e.mat, len: m + 1 });
            }
            let Some(cone) = self.cones.get(e.block) else {
                return Err(Error::IndexOutOfRange { index: e.block, len: self.cones.len() });
            };
            let side = cone.side();
            if e.i >= side || e.j >= side {
                return Err(Error::IndexOutOfRange { index: e.i.max(e.j), len: side });
            }
            if !cone.is_psd() && e.i != e.j {
                return Err(Error::InvalidProblem("off-diagonal entry in a scalar block"));
            }
            if !e.value.is_finite() {
                return Err(Error::InvalidProblem("non-finite data entry"));
            }
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite right-hand side"));
        }
        Ok(())
    }

    /// Entries sorted by `(mat, block, i, j)` with `i ≤ j`, duplicates summed
    /// and exact zeros dropped.
    pub fn canonical_entries(&self) -> Vec<DataEntry> {
        let mut out: Vec<DataEntry> = self
            .entries
            .iter()
            .map(|e| {
                let (i, j) = if e.i <= e.j { (e.i, e.j) } else { (e.j, e.i) };
                DataEntry { i, j, ..*e }
            })
            .collect();
        out.sort_by_key(|e| (e.mat, e.block, e.i, e.j));
        let mut merged: Vec<DataEntry> = Vec::with_capacity(out.len());
        for e in out {
            match merged.last_mut() {
                Some(l) if (l.mat, l.block, l.i, l.j) == (e.mat, e.block, e.i, e.j) => l.value += e.value,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.value != 0.0);
        merged
    }
}
