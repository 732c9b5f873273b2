//! Splitting of the dual problem: the dual slack is split into one PSD block
//! per clique, coupled to free copies `v_k` through the affine constraint.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    adapt_rho, finish, prepare, relative_gap, unscaled_consensus, Algorithm, Clock, Evaluator, Finish,
    IterationRecord, Observer, SolveResult, SolverOptions, Status, Timings,
};
use crate::cone::project_all;
use crate::decomp::DecomposedProblem;
use crate::error::Error;
use crate::kkt::{kkt_factor, kkt_solve, KktMode, KktWorkspace};
use crate::scaling::ScalingRecord;
use crate::vecops::{dist2, norm2};

struct Snapshot {
    /// Multiplier of the affine constraint, scaled by `1/ρ`.
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    v: Vec<f64>,
    rho: f64,
}

fn candidate(w: &DecomposedProblem, rec: &ScalingRecord, snap: &Snapshot) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    // the primal point is the negated, rescaled multiplier
    let xs: Vec<f64> = snap.x.iter().map(|v| -snap.rho * v).collect();
    let mut x = vec![0.0; w.n_x];
    rec.unscale_x(&xs, &mut x);
    let mut y = vec![0.0; w.m];
    rec.unscale_y(&snap.y, &mut y);
    let mut zs = vec![0.0; w.n_x];
    w.apply_ht_add(1.0, &snap.z, &mut zs);
    let mut z = vec![0.0; w.n_x];
    rec.unscale_z(&zs, &mut z);
    (x, y, z)
}

pub fn solve_dual_with(
    dp: &DecomposedProblem,
    opts: &SolverOptions,
    clock: &dyn Clock,
    observer: &mut dyn Observer,
) -> Result<SolveResult, Error> {
    opts.validate()?;
    let t_start = clock.now();
    let (work, rec) = prepare(dp, opts);
    let w = work.get();
    let t_setup = clock.now();
    let cache = kkt_factor(w, KktMode::PrimalDual)?;
    let t_factor = clock.now();

    let (n, m, nd) = (w.n_x, w.m, w.nd);
    let mut ws = KktWorkspace::new(w);
    let mut st = Snapshot { x: vec![0.0; n], y: vec![0.0; m], z: vec![0.0; nd], v: vec![0.0; nd], rho: opts.rho };
    let mut lam = vec![0.0; nd];
    let mut z_prev = vec![0.0; nd];
    let mut tmp = vec![0.0; nd];
    let mut hx = vec![0.0; nd];
    let mut rhs_x = vec![0.0; n];
    let mut rhs_y = vec![0.0; m];
    let mut bufs = [vec![0.0; nd], vec![0.0; nd]];
    let mut ev = Evaluator::new(dp);

    let mut timings = Timings::default();
    let mut status = Status::MaxIterations;
    let mut iterations = 0;
    let mut best: Option<(f64, Snapshot)> = None;
    let ad = opts.adaptive;

    for it in 1..=opts.max_iter {
        let rho = st.rho;
        let ta = clock.now();
        z_prev.copy_from_slice(&st.z);
        for k in 0..nd {
            st.z[k] = st.v[k] - lam[k] / rho;
        }
        project_all(&w.blocks, &mut st.z, true, opts.parallel_projections)?;
        let tb = clock.now();

        for k in 0..nd {
            tmp[k] = st.z[k] + lam[k] / rho;
        }
        rhs_x.copy_from_slice(&w.c);
        w.apply_ht_add(-1.0, &tmp, &mut rhs_x);
        for i in 0..m {
            rhs_y[i] = -w.b[i] / rho;
        }
        kkt_solve(&cache, w, &rhs_x, &rhs_y, &mut st.x, &mut st.y, &mut ws)?;
        w.apply_h(&st.x, &mut hx);
        for k in 0..nd {
            st.v[k] = tmp[k] + hx[k];
            lam[k] = -rho * hx[k];
        }
        let tc = clock.now();
        timings.conic_s += tb - ta;
        timings.affine_s += tc - tb;

        let eps_c = relative_gap(&st.z, &st.v);
        let eps_l = rho * dist2(&st.z, &z_prev) / norm2(&lam).max(1e-10);
        iterations = it;

        if observer.active() {
            let (x, y, z) = candidate(w, &rec, &st);
            let e = ev.evaluate(dp, &x, &y, &z);
            observer.record(&IterationRecord {
                iter: it,
                eps_p: e.eps_p,
                eps_d: e.eps_d,
                eps_g: e.eps_g,
                eps_c,
                rho,
                time_s: clock.now() - t_factor,
            });
        }

        let score = eps_c.max(eps_l);
        if score <= opts.eps_tol {
            status = Status::Optimal;
            break;
        }
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            let snap = Snapshot { x: st.x.clone(), y: st.y.clone(), z: st.z.clone(), v: st.v.clone(), rho };
            best = Some((score, snap));
        }
        if ad.enabled && it % ad.every == 0 {
            st.rho = adapt_rho(rho, eps_c, eps_l, ad.mu, ad.nu).clamp(ad.rho_min, ad.rho_max);
        }
    }
    let t_iter = clock.now();

    let chosen = match (status, best) {
        (Status::MaxIterations, Some((_, snap))) => snap,
        _ => st,
    };
    let eps_c = unscaled_consensus(&rec, &chosen.z, &chosen.v, true, &mut bufs);
    let (x, y, z) = candidate(w, &rec, &chosen);

    timings.setup_s = t_setup - t_start;
    timings.factor_s = t_factor - t_setup;
    timings.iterate_s = t_iter - t_factor;
    finish(
        dp,
        opts,
        clock,
        Finish {
            status,
            algorithm: Algorithm::Dual,
            x,
            y,
            z,
            eps_c,
            iterations,
            certificate: None,
            rho: chosen.rho,
            rank_warning: cache.rank_warning,
            invariants: None,
            timings,
        },
    )
}
