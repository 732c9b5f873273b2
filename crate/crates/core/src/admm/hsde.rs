//! Homogeneous self-dual embedding of the decomposed pair.
//!
//! The embedding variable is `u = (x, s, y, t, τ)` with `s` the clique
//! blocks of the primal point and `t` free copies of the clique blocks of
//! the dual slack; `v = (0, z, 0, 0, κ)` holds the dual cone part. Each
//! iteration solves one linear system with `I + Q` and projects once.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    finish, prepare, relative_gap_floor, Algorithm, Certificate, Clock, Evaluator, Finish, InvariantReport,
    IterationRecord, Observer, SolveResult, SolverOptions, Status, Timings, INVARIANT_COMPL_TOL,
    INVARIANT_CONE_TOL,
};
use crate::cone::{cone_violation, project_all};
use crate::decomp::{BlockKind, DecomposedProblem};
use crate::error::Error;
use crate::kkt::{embedding_len, hsde_affine, kkt_factor, KktMode, KktWorkspace};
use crate::scaling::ScalingRecord;
use crate::vecops::{dot, norm2};

/// Relative size of `τ` (against `‖u‖`) below which no candidate is formed.
const TAU_FLOOR: f64 = 1e-12;

/// Offsets of the pieces of `u`.
#[derive(Clone, Copy)]
struct Layout {
    n: usize,
    nd: usize,
    m: usize,
}

impl Layout {
    fn s(&self) -> core::ops::Range<usize> {
        self.n..self.n + self.nd
    }
    fn y(&self) -> core::ops::Range<usize> {
        self.n + self.nd..self.n + self.nd + self.m
    }
    fn t(&self) -> core::ops::Range<usize> {
        let o = self.n + self.nd + self.m;
        o..o + self.nd
    }
    fn tau(&self) -> usize {
        self.n + 2 * self.nd + self.m
    }
}

/// Unscaled images of the embedding pieces, before division by `τ`.
struct Unscaled {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    us: Vec<f64>,
    hx: Vec<f64>,
    vz: Vec<f64>,
    ut: Vec<f64>,
    tmp_n: Vec<f64>,
    tmp_nd: Vec<f64>,
}

impl Unscaled {
    fn new(dp: &DecomposedProblem) -> Self {
        let (n, m, nd) = (dp.n_x, dp.m, dp.nd);
        Self {
            x: vec![0.0; n],
            y: vec![0.0; m],
            z: vec![0.0; n],
            us: vec![0.0; nd],
            hx: vec![0.0; nd],
            vz: vec![0.0; nd],
            ut: vec![0.0; nd],
            tmp_n: vec![0.0; n],
            tmp_nd: vec![0.0; nd],
        }
    }

    /// Fill the direction vectors `(x, y, z)` and return the consensus gap
    /// of `u/τ`, `v/τ` (the floor of the relative gap scales with τ).
    fn load(&mut self, w: &DecomposedProblem, rec: &ScalingRecord, lay: Layout, u: &[f64], v: &[f64]) -> f64 {
        let ux = &u[..lay.n];
        rec.unscale_x(ux, &mut self.x);
        rec.unscale_y(&u[lay.y()], &mut self.y);
        self.tmp_n.iter_mut().for_each(|e| *e = 0.0);
        w.apply_ht_add(1.0, &v[lay.s()], &mut self.tmp_n);
        rec.unscale_z(&self.tmp_n, &mut self.z);

        rec.unscale_s(&u[lay.s()], &mut self.us);
        w.apply_h(ux, &mut self.tmp_nd);
        rec.unscale_s(&self.tmp_nd, &mut self.hx);
        rec.unscale_t(&v[lay.s()], &mut self.vz);
        rec.unscale_t(&u[lay.t()], &mut self.ut);
        let tau = u[lay.tau()].max(0.0);
        relative_gap_floor(&self.us, &self.hx, tau).max(relative_gap_floor(&self.vz, &self.ut, tau))
    }
}

struct Best {
    score: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    eps_c: f64,
}

fn check_invariants(w: &DecomposedProblem, lay: Layout, u: &[f64], v: &[f64], rep: &mut InvariantReport) -> Result<(), Error> {
    let mut bad = false;
    let mut worst_u: f64 = 0.0;
    let mut worst_v: f64 = 0.0;
    let us = &u[lay.s()];
    let vs = &v[lay.s()];
    for blk in &w.blocks {
        let r = blk.range();
        let (pu, pv) = (&us[r.clone()], &vs[r]);
        worst_u = worst_u.max(cone_violation(blk.kind, blk.dim, pu, false)? / norm2(pu).max(1.0));
        worst_v = worst_v.max(cone_violation(blk.kind, blk.dim, pv, true)? / norm2(pv).max(1.0));
    }
    let tau = u[lay.tau()];
    let kappa = v[lay.tau()];
    worst_u = worst_u.max(-tau);
    worst_v = worst_v.max(-kappa);
    // the free parts of v are exactly zero by construction
    let free_nonzero = v[..lay.n].iter().chain(&v[lay.y()]).chain(&v[lay.t()]).any(|&e| e != 0.0);
    let compl = dot(u, v).abs() / (1.0 + norm2(u) * norm2(v));
    if worst_u > INVARIANT_CONE_TOL || worst_v > INVARIANT_CONE_TOL || compl > INVARIANT_COMPL_TOL || free_nonzero {
        bad = true;
    }
    rep.iterations_checked += 1;
    rep.max_u_violation = rep.max_u_violation.max(worst_u);
    rep.max_v_violation = rep.max_v_violation.max(worst_v);
    rep.max_complementarity = rep.max_complementarity.max(compl);
    if bad {
        rep.failures += 1;
    }
    Ok(())
}

pub fn solve_hsde_with(
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
    let cache = kkt_factor(w, KktMode::Hsde)?;
    let t_factor = clock.now();

    let lay = Layout { n: w.n_x, nd: w.nd, m: w.m };
    let len = embedding_len(w);
    let mut ws = KktWorkspace::new(w);
    let mut u = vec![0.0; len];
    let mut v = vec![0.0; len];
    u[lay.tau()] = 1.0;
    v[lay.tau()] = 1.0;
    let mut sum = vec![0.0; len];
    let mut uhat = vec![0.0; len];

    let mut un = Unscaled::new(dp);
    let mut ev = Evaluator::new(dp);
    let norm_b = norm2(&dp.b);
    let norm_c = norm2(&dp.c);
    let mut dres = vec![0.0; dp.n_x];
    let mut ax = vec![0.0; dp.m];

    let mut timings = Timings::default();
    let mut status = Status::MaxIterations;
    let mut certificate = None;
    let mut iterations = 0;
    let mut best: Option<Best> = None;
    let mut last_eps_c = 1.0;
    let mut report = InvariantReport::default();

    for it in 1..=opts.max_iter {
        let ta = clock.now();
        for k in 0..len {
            sum[k] = u[k] + v[k];
        }
        hsde_affine(&cache, w, &sum, &mut uhat, &mut ws)?;
        let tb = clock.now();
        for k in 0..len {
            u[k] = uhat[k] - v[k];
        }
        project_all(&w.blocks, &mut u[lay.s()], false, opts.parallel_projections)?;
        let ti = lay.tau();
        u[ti] = u[ti].max(0.0);
        let tc = clock.now();
        timings.affine_s += tb - ta;
        timings.conic_s += tc - tb;

        for k in lay.s() {
            v[k] += u[k] - uhat[k];
        }
        v[ti] += u[ti] - uhat[ti];
        v[..lay.n].iter_mut().for_each(|e| *e = 0.0);
        v[lay.n + lay.nd..ti].iter_mut().for_each(|e| *e = 0.0);
        for blk in &w.blocks {
            if blk.kind == BlockKind::Free {
                let r = blk.range();
                v[lay.n + r.start..lay.n + r.end].iter_mut().for_each(|e| *e = 0.0);
            }
        }
        iterations = it;
        if opts.check_invariants {
            check_invariants(w, lay, &u, &v, &mut report)?;
        }

        let tau = u[ti];
        let kappa = v[ti];
        let eps_c = un.load(w, &rec, lay, &u, &v);
        last_eps_c = eps_c;
        // a candidate exists only while τ is clearly nonzero
        if tau > TAU_FLOOR * norm2(&u) {
            let inv = 1.0 / tau;
            let x: Vec<f64> = un.x.iter().map(|e| e * inv).collect();
            let y: Vec<f64> = un.y.iter().map(|e| e * inv).collect();
            let z: Vec<f64> = un.z.iter().map(|e| e * inv).collect();
            let e = ev.evaluate(dp, &x, &y, &z);
            if observer.active() {
                observer.record(&IterationRecord {
                    iter: it,
                    eps_p: e.eps_p,
                    eps_d: e.eps_d,
                    eps_g: e.eps_g,
                    eps_c,
                    rho: 1.0,
                    time_s: clock.now() - t_factor,
                });
            }
            let score = e.eps_p.max(e.eps_d).max(e.eps_g).max(eps_c);
            if best.as_ref().is_none_or(|b| score < b.score) {
                best = Some(Best { score, x, y, z, eps_c });
            }
            if score <= opts.eps_tol {
                status = Status::Optimal;
                break;
            }
        }

        // infeasibility is only plausible once κ has overtaken τ
        if kappa >= tau {
            let by = dot(&dp.b, &un.y);
            if by > 0.0 {
                dres.copy_from_slice(&un.z);
                dp.a.mul_t_vec_add(1.0, &un.y, &mut dres);
                if norm2(&dres) <= by / norm_b * opts.eps_tol {
                    status = Status::PrimalInfeasible;
                    certificate = Some(Certificate::PrimalInfeasible(un.y.iter().map(|e| e / by).collect()));
                    break;
                }
            }
            let cx = dot(&dp.c, &un.x);
            if cx < 0.0 {
                dp.a.mul_vec(&un.x, &mut ax);
                if norm2(&ax) <= -cx / norm_c * opts.eps_tol {
                    status = Status::DualInfeasible;
                    certificate = Some(Certificate::DualInfeasible(un.x.iter().map(|e| -e / cx).collect()));
                    break;
                }
            }
        }
    }
    let t_iter = clock.now();

    let (x, y, z, eps_c) = match status {
        Status::PrimalInfeasible => {
            let by = dot(&dp.b, &un.y);
            let y = certificate.as_ref().map(|c: &Certificate| c.vector().to_vec()).unwrap_or_default();
            let z = un.z.iter().map(|e| e / by).collect();
            (vec![0.0; dp.n_x], y, z, last_eps_c)
        }
        Status::DualInfeasible => {
            let x = certificate.as_ref().map(|c: &Certificate| c.vector().to_vec()).unwrap_or_default();
            (x, vec![0.0; dp.m], vec![0.0; dp.n_x], last_eps_c)
        }
        _ => match best {
            Some(b) => (b.x, b.y, b.z, b.eps_c),
            None => (vec![0.0; dp.n_x], vec![0.0; dp.m], vec![0.0; dp.n_x], last_eps_c),
        },
    };

    timings.setup_s = t_setup - t_start;
    timings.factor_s = t_factor - t_setup;
    timings.iterate_s = t_iter - t_factor;
    finish(
        dp,
        opts,
        clock,
        Finish {
            status,
            algorithm: Algorithm::Hsde,
            x,
            y,
            z,
            eps_c,
            iterations,
            certificate,
            rho: 1.0,
            rank_warning: cache.rank_warning,
            invariants: opts.check_invariants.then_some(report),
            timings,
        },
    )
}
