//! ADMM engines on the decomposed problem.
//!
//! * [`solve_primal`]: splitting of the primal problem with clique copies of
//!   `x` (cannot detect infeasibility).
//! * [`solve_dual`]: splitting of the dual problem with clique slack blocks
//!   (cannot detect infeasibility).
//! * [`solve_hsde`]: the homogeneous self-dual embedding of the decomposed
//!   pair; returns optimal points or infeasibility certificates.
//!
//! All engines work on rescaled data (unless disabled) and report residuals
//! of the unscaled problem.

mod dual;
mod hsde;
mod primal;

use alloc::vec;
use alloc::vec::Vec;

use crate::completion::{self, Completion};
use crate::decomp::{decompose, DecomposedProblem};
use crate::error::Error;
use crate::problem::ConicProblem;
use crate::scaling::{rescale, ScalingRecord};
use crate::vecops::{dot, norm2};

pub use dual::solve_dual_with;
pub use hsde::solve_hsde_with;
pub use primal::solve_primal_with;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Primal,
    Dual,
    Hsde,
}

/// Penalty adaptation of the primal and dual engines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveRho {
    pub enabled: bool,
    /// Multiplicative step (`μ`).
    pub mu: f64,
    /// Imbalance ratio that triggers a step (`ν`).
    pub nu: f64,
    /// Iterations between two adaptation checks.
    pub every: usize,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl Default for AdaptiveRho {
    fn default() -> Self {
        Self { enabled: true, mu: 2.0, nu: 10.0, every: 1, rho_min: 1e-6, rho_max: 1e6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub eps_tol: f64,
    pub max_iter: usize,
    /// Initial penalty of the primal and dual engines.
    pub rho: f64,
    pub adaptive: AdaptiveRho,
    pub rescale: bool,
    pub algorithm: Algorithm,
    pub parallel_projections: bool,
    /// Verify cone membership and complementarity of the embedding iterates
    /// after every iteration (costly; meant for testing).
    pub check_invariants: bool,
    /// Run the PSD completion of the returned primal point.
    pub complete: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps_tol: 1e-3,
            max_iter: 2000,
            rho: 1.0,
            adaptive: AdaptiveRho::default(),
            rescale: true,
            algorithm: Algorithm::Hsde,
            parallel_projections: false,
            check_invariants: false,
            complete: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.eps_tol > 0.0) {
            return Err(Error::InvalidOption("tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidOption("iteration limit must be at least 1"));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidOption("penalty must be positive"));
        }
        let a = &self.adaptive;
        if !(a.mu >= 1.0) || !(a.nu >= 1.0) {
            return Err(Error::InvalidOption("adaptive penalty parameters must be at least 1"));
        }
        if a.every == 0 || !(a.rho_min > 0.0) || !(a.rho_max >= a.rho_min) {
            return Err(Error::InvalidOption("invalid adaptive penalty bounds"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::PrimalInfeasible => "primal_infeasible",
            Status::DualInfeasible => "dual_infeasible",
            Status::MaxIterations => "max_iterations",
        }
    }
}

/// Relative residuals of the returned point (unscaled problem).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub eps_p: f64,
    pub eps_d: f64,
    pub eps_g: f64,
    pub eps_c: f64,
    pub eps_alpha: f64,
}

/// Wall-clock seconds spent per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    /// Decomposition and rescaling.
    pub setup_s: f64,
    pub factor_s: f64,
    pub iterate_s: f64,
    /// Completion metric and optional matrix completion.
    pub completion_s: f64,
    /// Part of `iterate_s` spent in the affine (linear-solve) steps.
    pub affine_s: f64,
    /// Part of `iterate_s` spent in the cone projections.
    pub conic_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `y` with `bᵀy = 1` and `Σ y_i A_i ⪯ 0` (approximately).
    PrimalInfeasible(Vec<f64>),
    /// `x` in reduced coordinates with `cᵀx = −1`, `A x ≈ 0`, `x` completable.
    DualInfeasible(Vec<f64>),
}

impl Certificate {
    pub fn vector(&self) -> &[f64] {
        match self {
            Certificate::PrimalInfeasible(v) | Certificate::DualInfeasible(v) => v,
        }
    }
}

/// Worst violations of the embedding invariants over all iterations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InvariantReport {
    pub iterations_checked: usize,
    /// Largest cone violation of `u`, relative to `max(1, ‖piece‖)`.
    pub max_u_violation: f64,
    /// Largest dual-cone violation of `v`, relative to `max(1, ‖piece‖)`.
    pub max_v_violation: f64,
    /// Largest `|⟨u, v⟩| / (1 + ‖u‖‖v‖)`.
    pub max_complementarity: f64,
    /// Iterations that broke one of the tolerances.
    pub failures: usize,
}

/// Tolerances used when checking the embedding invariants.
pub const INVARIANT_CONE_TOL: f64 = 1e-9;
pub const INVARIANT_COMPL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    pub algorithm: Algorithm,
    /// `⟨C, X⟩` at the returned point, in the problem's reporting sign.
    pub primal_objective: f64,
    /// `bᵀy` at the returned point, in the problem's reporting sign.
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub timings: Timings,
    /// Primal point in reduced coordinates.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Dual slack in reduced coordinates.
    pub z: Vec<f64>,
    pub certificate: Option<Certificate>,
    /// Final penalty (`1` for the embedding engine, which has none).
    pub rho: f64,
    pub rank_warning: bool,
    pub invariants: Option<InvariantReport>,
    /// One completed matrix per PSD cone when completion was requested.
    pub completions: Vec<Completion>,
}

impl SolveResult {
    pub fn completion_warning(&self) -> bool {
        self.completions.iter().any(|c| c.warning)
    }
}

/// Residuals of one iteration, for tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub eps_p: f64,
    pub eps_d: f64,
    pub eps_g: f64,
    pub eps_c: f64,
    pub rho: f64,
    pub time_s: f64,
}

/// Receives one record per iteration.
pub trait Observer {
    /// Whether records are wanted; engines skip the extra residual work
    /// when this is `false`.
    fn active(&self) -> bool {
        true
    }
    fn record(&mut self, rec: &IterationRecord);
}

impl Observer for () {
    fn active(&self) -> bool {
        false
    }
    fn record(&mut self, _rec: &IterationRecord) {}
}

impl Observer for Vec<IterationRecord> {
    fn record(&mut self, rec: &IterationRecord) {
        self.push(*rec);
    }
}

/// Monotonic time source in seconds. `()` always reads zero, which is what
/// `no_std` builds without a timer get.
pub trait Clock {
    fn now(&self) -> f64;
}

impl Clock for () {
    fn now(&self) -> f64 {
        0.0
    }
}

/// Multiplicative penalty update: grow `ρ` when the primal-type residual
/// dominates by a factor `ν`, shrink it in the opposite case.
pub fn adapt_rho(rho: f64, primal_res: f64, dual_res: f64, mu: f64, nu: f64) -> f64 {
    if primal_res >= nu * dual_res && primal_res > 0.0 {
        rho * mu
    } else if dual_res >= nu * primal_res && dual_res > 0.0 {
        rho / mu
    } else {
        rho
    }
}

/// Decompose and solve with the engine selected in `opts`.
pub fn solve(problem: &ConicProblem, opts: &SolverOptions) -> Result<SolveResult, Error> {
    solve_with(problem, opts, &(), &mut ())
}

pub fn solve_with(
    problem: &ConicProblem,
    opts: &SolverOptions,
    clock: &dyn Clock,
    observer: &mut dyn Observer,
) -> Result<SolveResult, Error> {
    opts.validate()?;
    let t0 = clock.now();
    let dp = decompose(problem)?;
    let decomp_s = clock.now() - t0;
    let mut res = match opts.algorithm {
        Algorithm::Primal => solve_primal_with(&dp, opts, clock, observer)?,
        Algorithm::Dual => solve_dual_with(&dp, opts, clock, observer)?,
        Algorithm::Hsde => solve_hsde_with(&dp, opts, clock, observer)?,
    };
    res.timings.setup_s += decomp_s;
    Ok(res)
}

pub fn solve_primal(dp: &DecomposedProblem, opts: &SolverOptions) -> Result<SolveResult, Error> {
    solve_primal_with(dp, opts, &(), &mut ())
}

pub fn solve_dual(dp: &DecomposedProblem, opts: &SolverOptions) -> Result<SolveResult, Error> {
    solve_dual_with(dp, opts, &(), &mut ())
}

pub fn solve_hsde(dp: &DecomposedProblem, opts: &SolverOptions) -> Result<SolveResult, Error> {
    solve_hsde_with(dp, opts, &(), &mut ())
}

/// Scaled working copy of the data, or a borrow when rescaling is off.
#[allow(clippy::large_enum_variant)]
pub(crate) enum Working<'a> {
    Borrowed(&'a DecomposedProblem),
    Owned(DecomposedProblem),
}

impl Working<'_> {
    pub(crate) fn get(&self) -> &DecomposedProblem {
        match self {
            Working::Borrowed(d) => d,
            Working::Owned(d) => d,
        }
    }
}

pub(crate) fn prepare<'a>(dp: &'a DecomposedProblem, opts: &SolverOptions) -> (Working<'a>, ScalingRecord) {
    if opts.rescale {
        let (scaled, rec) = rescale(dp);
        (Working::Owned(scaled), rec)
    } else {
        (Working::Borrowed(dp), ScalingRecord::identity(dp))
    }
}

/// Objectives and relative residuals of an unscaled candidate.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Evaluation {
    pub eps_p: f64,
    pub eps_d: f64,
    pub eps_g: f64,
    pub pobj: f64,
    pub dobj: f64,
}

pub(crate) struct Evaluator {
    ax: Vec<f64>,
    dres: Vec<f64>,
    norm_b: f64,
    norm_c: f64,
}

impl Evaluator {
    pub(crate) fn new(dp: &DecomposedProblem) -> Self {
        Self { ax: vec![0.0; dp.m], dres: vec![0.0; dp.n_x], norm_b: norm2(&dp.b), norm_c: norm2(&dp.c) }
    }

    pub(crate) fn evaluate(&mut self, dp: &DecomposedProblem, x: &[f64], y: &[f64], z: &[f64]) -> Evaluation {
        dp.a.mul_vec(x, &mut self.ax);
        for i in 0..dp.m {
            self.ax[i] -= dp.b[i];
        }
        for j in 0..dp.n_x {
            self.dres[j] = z[j] - dp.c[j];
        }
        dp.a.mul_t_vec_add(1.0, y, &mut self.dres);
        let pobj = dot(&dp.c, x);
        let dobj = dot(&dp.b, y);
        Evaluation {
            eps_p: norm2(&self.ax) / (1.0 + self.norm_b),
            eps_d: norm2(&self.dres) / (1.0 + self.norm_c),
            eps_g: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
            pobj,
            dobj,
        }
    }
}

/// `‖a − b‖ / max(1, ‖a‖, ‖b‖)`.
///
/// The floor keeps the measure meaningful when the optimal clique vectors
/// vanish (for example a zero dual slack at an interior primal optimum),
/// where the purely relative gap stays of order one.
pub(crate) fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    relative_gap_floor(a, b, 1.0)
}

/// `‖a − b‖ / max(floor, ‖a‖, ‖b‖)`, zero when everything vanishes.
pub(crate) fn relative_gap_floor(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let num = crate::vecops::dist2(a, b);
    let den = norm2(a).max(norm2(b)).max(floor);
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Consensus gap `‖a − b‖ / max(1, ‖a‖, ‖b‖)` of two clique vectors given in
/// scaled coordinates, measured after unscaling.
pub(crate) fn unscaled_consensus(rec: &ScalingRecord, a: &[f64], b: &[f64], dual: bool, buf: &mut [Vec<f64>; 2]) -> f64 {
    let [ua, ub] = buf;
    if dual {
        rec.unscale_t(a, ua);
        rec.unscale_t(b, ub);
    } else {
        rec.unscale_s(a, ua);
        rec.unscale_s(b, ub);
    }
    relative_gap(ua, ub)
}

/// Clique-wise PSD violation over all PSD cones of `x` (unscaled).
pub(crate) fn psd_violation_all(dp: &DecomposedProblem, x: &[f64]) -> Result<f64, Error> {
    let mut alpha: f64 = 0.0;
    let mut sq = 0.0;
    for (q, info) in dp.psd.iter().enumerate() {
        let xs = dp.psd_slice(q, x);
        sq += dot(xs, xs);
        alpha = alpha.max(completion::clique_alpha(&info.cliques, &info.layout, xs)?);
    }
    Ok(alpha / (1.0 + libm::sqrt(sq)))
}

/// Shared epilogue: completion metric, optional completion, packaging.
pub(crate) struct Finish {
    pub status: Status,
    pub algorithm: Algorithm,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub eps_c: f64,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
    pub rho: f64,
    pub rank_warning: bool,
    pub invariants: Option<InvariantReport>,
    pub timings: Timings,
}

pub(crate) fn finish(dp: &DecomposedProblem, opts: &SolverOptions, clock: &dyn Clock, f: Finish) -> Result<SolveResult, Error> {
    let t0 = clock.now();
    let mut ev = Evaluator::new(dp);
    let e = ev.evaluate(dp, &f.x, &f.y, &f.z);
    let eps_alpha = psd_violation_all(dp, &f.x)?;
    let mut completions = Vec::new();
    if opts.complete {
        for (q, info) in dp.psd.iter().enumerate() {
            completions.push(completion::psd_complete(&info.cliques, &info.layout, dp.psd_slice(q, &f.x))?);
        }
    }
    let mut timings = f.timings;
    timings.completion_s = clock.now() - t0;
    let sign = dp.base.report_sign;
    Ok(SolveResult {
        status: f.status,
        algorithm: f.algorithm,
        primal_objective: sign * e.pobj,
        dual_objective: sign * e.dobj,
        residuals: Residuals { eps_p: e.eps_p, eps_d: e.eps_d, eps_g: e.eps_g, eps_c: f.eps_c, eps_alpha },
        iterations: f.iterations,
        timings,
        x: f.x,
        y: f.y,
        z: f.z,
        certificate: f.certificate,
        rho: f.rho,
        rank_warning: f.rank_warning,
        invariants: f.invariants,
        completions,
    })
}
