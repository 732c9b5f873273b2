//! Diagonal rescaling of the decomposed data.
//!
//! The scaled problem uses
//!
//! ```text
//! Ā = E A Dx,   b̄ = ρb E b,   c̄ = σ Dx c,   H̄ = Ds⁻¹ H Dx
//! ```
//!
//! with `Dx` from a Ruiz equilibration of `A`, and `Ds` constant on every
//! PSD clique piece so that clique cones map onto themselves. Solutions map
//! back as `x = Dx x̄ / ρb`, `s = Ds s̄ / ρb`, `y = E ȳ / σ`,
//! `z = Dx⁻¹ z̄ / σ` (reduced space) and `t = Ds⁻¹ t̄ / σ` (clique space).

use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::{BlockKind, DecomposedProblem};
use crate::vecops::norm2;

const RUIZ_ITERS: usize = 25;
const MIN_SCALE: f64 = 1e-4;
const MAX_SCALE: f64 = 1e4;

/// Diagonal scalings applied by [`rescale`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    /// `Dx`, one entry per reduced coordinate.
    pub primal_scale: Vec<f64>,
    /// `Ds`, one entry per clique-vector coordinate.
    pub cone_scale: Vec<f64>,
    /// `E`, one entry per constraint.
    pub row_scale: Vec<f64>,
    /// `σ`, multiplies the cost.
    pub cost_scale: f64,
    /// `ρb`, multiplies the right-hand side.
    pub rhs_scale: f64,
}

impl ScalingRecord {
    /// Scalings that leave the problem unchanged.
    pub fn identity(dp: &DecomposedProblem) -> Self {
        Self {
            primal_scale: vec![1.0; dp.n_x],
            cone_scale: vec![1.0; dp.nd],
            row_scale: vec![1.0; dp.m],
            cost_scale: 1.0,
            rhs_scale: 1.0,
        }
    }

    pub fn unscale_x(&self, xs: &[f64], out: &mut [f64]) {
        for ((o, &v), &d) in out.iter_mut().zip(xs).zip(&self.primal_scale) {
            *o = d * v / self.rhs_scale;
        }
    }

    pub fn scale_x(&self, x: &[f64], out: &mut [f64]) {
        for ((o, &v), &d) in out.iter_mut().zip(x).zip(&self.primal_scale) {
            *o = v * self.rhs_scale / d;
        }
    }

    pub fn unscale_s(&self, ss: &[f64], out: &mut [f64]) {
        for ((o, &v), &d) in out.iter_mut().zip(ss).zip(&self.cone_scale) {
            *o = d * v / self.rhs_scale;
        }
    }

    pub fn scale_s(&self, s: &[f64], out: &mut [f64]) {
        for ((o, &v), &d) in out.iter_mut().zip(s).zip(&self.cone_scale) {
            *o = v * self.rhs_scale / d;
        }
    }

    pub fn unscale_y(&self, ys: &[f64], out: &mut [f64]) {
        for ((o, &v), &e) in out.iter_mut().zip(ys).zip(&self.row_scale) {
            *o = e * v / self.cost_scale;
        }
    }

    pub fn scale_y(&self, y: &[f64], out: &mut [f64]) {
        for ((o, &v), &e) in out.iter_mut().zip(y).zip(&self.row_scale) {
            *o = v * self.cost_scale / e;
        }
    }

    /// Dual slack in reduced coordinates.
    pub fn unscale_z(&self, zs: &[f64], out: &mut [f64]) {
        for ((o, &v), &d) in out.iter_mut().zip(zs).zip(&self.primal_scale) {
            *o = v / (d * self.cost_scale);
        }
    }

    pub fn scale_z(&self, z: &[f64], out: &mut [f64]) {
        for ((o, &v), &d) in out.iter_mut().zip(z).zip(&self.primal_scale) {
            *o = v * d * self.cost_scale;
        }
    }

    /// Dual variable on the clique vector.
    pub fn unscale_t(&self, ts: &[f64], out: &mut [f64]) {
        for ((o, &v), &d) in out.iter_mut().zip(ts).zip(&self.cone_scale) {
            *o = v / (d * self.cost_scale);
        }
    }

    pub fn scale_t(&self, t: &[f64], out: &mut [f64]) {
        for ((o, &v), &d) in out.iter_mut().zip(t).zip(&self.cone_scale) {
            *o = v * d * self.cost_scale;
        }
    }
}

fn clamp(v: f64) -> f64 {
    v.clamp(MIN_SCALE, MAX_SCALE)
}

/// Equilibrate `dp` and return the scaled copy with its scalings.
pub fn rescale(dp: &DecomposedProblem) -> (DecomposedProblem, ScalingRecord) {
    let (m, n) = (dp.m, dp.n_x);
    let mut e = vec![1.0; m];
    let mut dx = vec![1.0; n];
    let mut a = dp.a.clone();

    for _ in 0..RUIZ_ITERS {
        let mut row_max = vec![0.0f64; m];
        let mut col_max = vec![0.0f64; n];
        for r in 0..m {
            for p in a.row_ptr[r]..a.row_ptr[r + 1] {
                let v = a.vals[p].abs();
                row_max[r] = row_max[r].max(v);
                col_max[a.col_idx[p]] = col_max[a.col_idx[p]].max(v);
            }
        }
        let mut converged = true;
        let rf: Vec<f64> = row_max
            .iter()
            .map(|&v| if v > 0.0 { 1.0 / libm::sqrt(v) } else { 1.0 })
            .collect();
        let cf: Vec<f64> = col_max
            .iter()
            .map(|&v| if v > 0.0 { 1.0 / libm::sqrt(v) } else { 1.0 })
            .collect();
        for r in 0..m {
            let new = clamp(e[r] * rf[r]);
            if (new / e[r] - 1.0).abs() > 1e-3 {
                converged = false;
            }
            let f = new / e[r];
            e[r] = new;
            for p in a.row_ptr[r]..a.row_ptr[r + 1] {
                a.vals[p] *= f;
            }
        }
        let mut colf = vec![1.0; n];
        for j in 0..n {
            let new = clamp(dx[j] * cf[j]);
            if (new / dx[j] - 1.0).abs() > 1e-3 {
                converged = false;
            }
            colf[j] = new / dx[j];
            dx[j] = new;
        }
        for p in 0..a.vals.len() {
            a.vals[p] *= colf[a.col_idx[p]];
        }
        if converged {
            break;
        }
    }

    // one scalar per PSD clique piece, per-entry for scalar pieces
    let mut ds = vec![1.0; dp.nd];
    for blk in &dp.blocks {
        match blk.kind {
            BlockKind::Psd => {
                let mean_log = blk.idx.iter().map(|&j| libm::log(dx[j])).sum::<f64>() / blk.len().max(1) as f64;
                let g = libm::exp(mean_log);
                ds[blk.range()].iter_mut().for_each(|v| *v = g);
            }
            BlockKind::Free | BlockKind::NonNeg => {
                for (t, &j) in blk.idx.iter().enumerate() {
                    ds[blk.offset + t] = dx[j];
                }
            }
        }
    }

    let b_eq: Vec<f64> = dp.b.iter().zip(&e).map(|(v, s)| v * s).collect();
    let c_eq: Vec<f64> = dp.c.iter().zip(&dx).map(|(v, s)| v * s).collect();
    let mut row_norm_sum = 0.0;
    let mut col_sq = vec![0.0; n];
    for r in 0..m {
        let (cols, vals) = a.row(r);
        row_norm_sum += norm2(vals);
        for (c, v) in cols.iter().zip(vals) {
            col_sq[*c] += v * v;
        }
    }
    let mean_row = row_norm_sum / m.max(1) as f64;
    let mean_col = col_sq.iter().map(|v| libm::sqrt(*v)).sum::<f64>() / n.max(1) as f64;
    let nb = norm2(&b_eq);
    let nc = norm2(&c_eq);
    let rhs_scale = if nb > 0.0 { clamp(mean_row / nb) } else { 1.0 };
    let cost_scale = if nc > 0.0 { clamp(mean_col / nc) } else { 1.0 };

    let mut out = dp.clone();
    out.a = a;
    out.b = b_eq.iter().map(|v| v * rhs_scale).collect();
    out.c = c_eq.iter().map(|v| v * cost_scale).collect();
    for blk in &mut out.blocks {
        for t in 0..blk.idx.len() {
            blk.weight[t] *= dx[blk.idx[t]] / ds[blk.offset + t];
        }
    }
    out.recompute_d();
    let rec = ScalingRecord { primal_scale: dx, cone_scale: ds, row_scale: e, cost_scale, rhs_scale };
    (out, rec)
}
