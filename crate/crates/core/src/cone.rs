//! Projections onto the cone pieces of the stacked clique vector.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::decomp::{BlockKind, SBlock};
use crate::dense::{smat, svec_len, sym_eigen_tally, FlopTally};
use crate::error::Error;

/// Scratch matrix reused across PSD projections.
#[derive(Debug, Clone, Default)]
pub struct ProjWorkspace {
    mat: Vec<f64>,
}

impl ProjWorkspace {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Replace `v = svec(S)` by `svec` of the nearest PSD matrix in Frobenius
/// norm: eigendecompose and drop the negative part of the spectrum.
pub fn psd_project(v: &mut [f64], d: usize) -> Result<(), Error> {
    psd_project_with(v, d, &mut ProjWorkspace::new(), &mut ())
}

pub fn psd_project_with<T: FlopTally>(
    v: &mut [f64],
    d: usize,
    ws: &mut ProjWorkspace,
    tally: &mut T,
) -> Result<(), Error> {
    if v.len() != svec_len(d) {
        return Err(Error::DimensionMismatch { expected: svec_len(d), got: v.len() });
    }
    if d == 1 {
        v[0] = v[0].max(0.0);
        return Ok(());
    }
    ws.mat.resize(d * d, 0.0);
    smat(v, d, &mut ws.mat);
    let eig = sym_eigen_tally(&ws.mat, d, tally)?;
    let neg = eig.values.iter().take_while(|&&l| l < 0.0).count();
    if neg == 0 {
        return Ok(());
    }
    if neg == d {
        v.iter_mut().for_each(|x| *x = 0.0);
        return Ok(());
    }
    // assemble from whichever side of the spectrum is smaller
    let (range, start_from_zero) = if neg <= d - neg { (0..neg, false) } else { (neg..d, true) };
    let sign = if start_from_zero { 1.0 } else { -1.0 };
    let k = range.len() as u64;
    for j in 0..d {
        for i in 0..=j {
            let mut acc = 0.0;
            for r in range.clone() {
                acc += eig.values[r] * eig.vector_entry(i, r) * eig.vector_entry(j, r);
            }
            if i != j {
                acc *= SQRT_2;
            }
            let pos = j * (j + 1) / 2 + i;
            v[pos] = if start_from_zero { acc } else { v[pos] + sign * acc };
        }
    }
    tally.add(svec_len(d) as u64 * (3 * k + 1));
    Ok(())
}

/// Project one piece onto its cone (`dual = false`) or dual cone.
pub fn project_piece<T: FlopTally>(
    kind: BlockKind,
    dim: usize,
    v: &mut [f64],
    dual: bool,
    ws: &mut ProjWorkspace,
    tally: &mut T,
) -> Result<(), Error> {
    match (kind, dual) {
        (BlockKind::Free, false) => Ok(()),
        (BlockKind::Free, true) => {
            v.iter_mut().for_each(|x| *x = 0.0);
            Ok(())
        }
        (BlockKind::NonNeg, _) => {
            v.iter_mut().for_each(|x| *x = x.max(0.0));
            Ok(())
        }
        (BlockKind::Psd, _) => psd_project_with(v, dim, ws, tally),
    }
}

/// Project every piece of the stacked vector `s` onto its cone, or onto the
/// dual cone when `dual` is set.
///
/// With `parallel` set (and the `parallel` feature enabled) pieces are
/// handled concurrently; results are identical to the sequential path.
pub fn project_all(blocks: &[SBlock], s: &mut [f64], dual: bool, parallel: bool) -> Result<(), Error> {
    #[cfg(feature = "parallel")]
    if parallel && blocks.len() > 1 {
        use rayon::prelude::*;
        let mut pieces: Vec<(&SBlock, &mut [f64])> = Vec::with_capacity(blocks.len());
        let mut rest = s;
        let mut consumed = 0;
        for blk in blocks {
            let skip = blk.offset - consumed;
            let (_, tail) = core::mem::take(&mut rest).split_at_mut(skip);
            let (piece, tail) = tail.split_at_mut(blk.len());
            pieces.push((blk, piece));
            rest = tail;
            consumed = blk.offset + blk.len();
        }
        return pieces.into_par_iter().try_for_each_init(ProjWorkspace::new, |ws, (blk, piece)| {
            project_piece(blk.kind, blk.dim, piece, dual, ws, &mut ())
        });
    }
    let _ = parallel;
    let mut ws = ProjWorkspace::new();
    for blk in blocks {
        project_piece(blk.kind, blk.dim, &mut s[blk.range()], dual, &mut ws, &mut ())?;
    }
    Ok(())
}

/// Sequential projection that also counts floating-point work.
pub fn project_all_counted(blocks: &[SBlock], s: &mut [f64], tally: &mut u64) -> Result<(), Error> {
    let mut ws = ProjWorkspace::new();
    for blk in blocks {
        project_piece(blk.kind, blk.dim, &mut s[blk.range()], false, &mut ws, tally)?;
    }
    Ok(())
}

/// Smallest eigenvalue of a PSD piece given in `svec` form.
pub fn min_eigenvalue(v: &[f64], d: usize) -> Result<f64, Error> {
    if d == 0 {
        return Ok(0.0);
    }
    let mut mat = vec![0.0; d * d];
    smat(v, d, &mut mat);
    let e = sym_eigen_tally(&mat, d, &mut ())?;
    Ok(e.values[0])
}

/// How far a piece lies outside its cone (or dual cone); `0` when inside.
///
/// PSD pieces are measured by the negative part of the smallest eigenvalue,
/// nonnegative pieces by the most negative entry, and the dual of a free
/// piece (`{0}`) by the largest magnitude.
pub fn cone_violation(kind: BlockKind, dim: usize, v: &[f64], dual: bool) -> Result<f64, Error> {
    Ok(match (kind, dual) {
        (BlockKind::Free, false) => 0.0,
        (BlockKind::Free, true) => v.iter().fold(0.0, |m, x| f64::max(m, x.abs())),
        (BlockKind::NonNeg, _) => v.iter().fold(0.0, |m, &x| f64::max(m, -x)),
        (BlockKind::Psd, _) => (-min_eigenvalue(v, dim)?).max(0.0),
    })
}
