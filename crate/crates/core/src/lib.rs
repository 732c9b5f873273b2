//! Chordal decomposition and ADMM engines for sparse semidefinite programs.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature to get
//! `std::error::Error` integration and `parallel` to fan the per-clique cone
//! projections out over a rayon pool.
//!
//! The usual pipeline is
//!
//! 1. build a [`ConicProblem`] (block-structured data in SDPA style),
//! 2. [`decompose`] it: aggregate sparsity pattern, chordal extension,
//!    maximal cliques and entry-selector maps,
//! 3. run one of the engines in [`admm`] on the [`DecomposedProblem`].
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod admm;
pub mod completion;
pub mod cone;
pub mod decomp;
pub mod dense;
pub mod error;
pub mod flops;
pub mod kkt;
pub mod ordering;
pub mod pattern;
pub mod problem;
pub mod scaling;
pub mod sparse;
pub mod vecops;

pub use admm::{
    solve, solve_dual, solve_hsde, solve_primal, Algorithm, SolveResult, SolverOptions, Status,
};
pub use decomp::{decompose, DecomposedProblem};
pub use error::Error;
pub use pattern::{CliqueDecomposition, SparsityPattern};
pub use problem::{ConeSpec, ConicProblem, DataEntry};
