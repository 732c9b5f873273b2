//! Result JSON, schema version 1.
//!
//! Non-finite numbers (for example the objective of an infeasible problem)
//! are written as `null`.

use std::path::Path;

use cliquesdp_core::admm::Certificate;
use cliquesdp_core::{Algorithm, SolveResult, SolverOptions, Status};
use serde::{Deserialize, Serialize};

use crate::run::CliqueStats;
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultReport {
    pub schema: u32,
    pub status: String,
    pub algorithm: String,
    pub primal_objective: Option<f64>,
    pub dual_objective: Option<f64>,
    pub residuals: ResidualsReport,
    pub iterations: usize,
    pub timings: TimingsReport,
    pub options: OptionsReport,
    pub cliques: CliqueStats,
    pub rank_warning: bool,
    pub completion_warning: bool,
    pub certificate: Option<CertificateReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualsReport {
    pub eps_p: Option<f64>,
    pub eps_d: Option<f64>,
    pub eps_g: Option<f64>,
    pub eps_c: Option<f64>,
    pub eps_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingsReport {
    pub setup_s: f64,
    pub factor_s: f64,
    pub iterate_s: f64,
    pub completion_s: f64,
    pub affine_s: f64,
    pub conic_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionsReport {
    pub eps_tol: f64,
    pub max_iter: usize,
    pub rho: f64,
    pub adaptive: bool,
    pub rescale: bool,
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `"primal_infeasible"` (vector is `y`) or `"dual_infeasible"` (vector
    /// is `x` in reduced coordinates).
    pub kind: String,
    pub vector: Vec<Option<f64>>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Primal => "primal",
        Algorithm::Dual => "dual",
        Algorithm::Hsde => "hsde",
    }
}

impl ResultReport {
    pub fn new(res: &SolveResult, opts: &SolverOptions, stats: CliqueStats) -> Self {
        let r = &res.residuals;
        let t = &res.timings;
        let certificate = res.certificate.as_ref().map(|c| CertificateReport {
            kind: match c {
                Certificate::PrimalInfeasible(_) => Status::PrimalInfeasible,
                Certificate::DualInfeasible(_) => Status::DualInfeasible,
            }
            .as_str()
            .to_owned(),
            vector: c.vector().iter().map(|&v| finite(v)).collect(),
        });
        ResultReport {
            schema: SCHEMA_VERSION,
            status: res.status.as_str().to_owned(),
            algorithm: algorithm_name(res.algorithm).to_owned(),
            primal_objective: finite(res.primal_objective),
            dual_objective: finite(res.dual_objective),
            residuals: ResidualsReport {
                eps_p: finite(r.eps_p),
                eps_d: finite(r.eps_d),
                eps_g: finite(r.eps_g),
                eps_c: finite(r.eps_c),
                eps_alpha: finite(r.eps_alpha),
            },
            iterations: res.iterations,
            timings: TimingsReport {
                setup_s: t.setup_s.max(0.0),
                factor_s: t.factor_s.max(0.0),
                iterate_s: t.iterate_s.max(0.0),
                completion_s: t.completion_s.max(0.0),
                affine_s: t.affine_s.max(0.0),
                conic_s: t.conic_s.max(0.0),
            },
            options: OptionsReport {
                eps_tol: opts.eps_tol,
                max_iter: opts.max_iter,
                rho: opts.rho,
                adaptive: opts.adaptive.enabled,
                rescale: opts.rescale,
                parallel: opts.parallel_projections,
            },
            cliques: stats,
            rank_warning: res.rank_warning,
            completion_warning: res.completion_warning(),
            certificate,
        }
    }

    pub fn to_json(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn write_result_json(
    res: &SolveResult,
    opts: &SolverOptions,
    stats: CliqueStats,
    path: impl AsRef<Path>,
) -> Result<(), Error> {
    let text = ResultReport::new(res, opts, stats).to_json()?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
