//! Closed-form operation counts of one iteration.
//!
//! Following the usual convention, a flop is one addition, subtraction,
//! multiplication or division of two reals; indexing (such as applying an
//! entry selector) is free. `n` is the side of the original PSD cone, `m` the
//! number of constraints, `p` the number of cliques and `nd` the length of
//! the stacked clique vector.

use crate::kkt::KktMode;

/// Flops of the affine step, assuming the `m × m` factor is cached.
///
/// * saddle-point solve: `(4m + p + 3) n² + 2m² + 2 nd`
/// * embedding solve: `(8m + 2p + 11) n² + 2m² + 7m + 21 nd − 1`
pub fn flops_affine(n: u64, m: u64, p: u64, nd: u64, mode: KktMode) -> u128 {
    let (n, m, p, nd) = (n as u128, m as u128, p as u128, nd as u128);
    let n2 = n * n;
    match mode {
        KktMode::PrimalDual => (4 * m + p + 3) * n2 + 2 * m * m + 2 * nd,
        KktMode::Hsde => ((8 * m + 2 * p + 11) * n2 + 2 * m * m + 7 * m + 21 * nd).saturating_sub(1),
    }
}

/// Leading-order cost of the clique projections, `Σ |C_k|³`.
///
/// The constant in front depends on the eigensolver and is not included.
pub fn flops_conic(clique_sizes: &[usize]) -> u128 {
    clique_sizes.iter().map(|&c| (c as u128).pow(3)).sum()
}
