//! Solve driver with wall-clock timing and CSV iteration traces.

use std::io::Write;
use std::time::Instant;

use cliquesdp_core::admm::{
    solve_dual_with, solve_hsde_with, solve_primal_with, Clock, IterationRecord, Observer,
};
use cliquesdp_core::{decompose, Algorithm, ConicProblem, DecomposedProblem, SolveResult, SolverOptions};

use crate::Error;

/// Monotonic clock measured from its creation.
pub struct StdClock(Instant);

impl StdClock {
    pub fn new() -> Self {
        StdClock(Instant::now())
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

pub const TRACE_HEADER: [&str; 7] = ["iter", "eps_p", "eps_d", "eps_g", "eps_c", "rho", "time_s"];

/// Observer writing one CSV row per iteration. Write errors are kept and
/// reported by [`CsvTrace::finish`].
pub struct CsvTrace<W: Write> {
    out: csv::Writer<W>,
    error: Option<csv::Error>,
}

impl<W: Write> CsvTrace<W> {
    pub fn new(out: W) -> Result<Self, Error> {
        let mut out = csv::Writer::from_writer(out);
        out.write_record(TRACE_HEADER)?;
        Ok(Self { out, error: None })
    }

    pub fn finish(mut self) -> Result<(), Error> {
        if let Some(e) = self.error {
            return Err(e.into());
        }
        self.out.flush()?;
        Ok(())
    }
}

impl<W: Write> Observer for CsvTrace<W> {
    fn record(&mut self, r: &IterationRecord) {
        if self.error.is_some() {
            return;
        }
        let row = [
            r.iter.to_string(),
            r.eps_p.to_string(),
            r.eps_d.to_string(),
            r.eps_g.to_string(),
            r.eps_c.to_string(),
            r.rho.to_string(),
            r.time_s.to_string(),
        ];
        if let Err(e) = self.out.write_record(&row) {
            self.error = Some(e);
        }
    }
}

/// Size statistics of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CliqueStats {
    /// Side of the largest PSD cone.
    pub n: usize,
    pub m: usize,
    /// Number of PSD cliques over all PSD cones.
    pub p: usize,
    pub max_clique: usize,
    pub min_clique: usize,
    /// Length of the stacked clique vector.
    pub nd: usize,
    /// Length of the reduced primal vector.
    pub n_x: usize,
}

impl CliqueStats {
    pub fn of(dp: &DecomposedProblem) -> Self {
        let sizes = dp.clique_sizes();
        CliqueStats {
            n: dp.psd.iter().map(|p| p.layout.n).max().unwrap_or(0),
            m: dp.m,
            p: sizes.len(),
            max_clique: sizes.iter().copied().max().unwrap_or(0),
            min_clique: sizes.iter().copied().min().unwrap_or(0),
            nd: dp.nd,
            n_x: dp.n_x,
        }
    }
}

pub struct Outcome {
    pub result: SolveResult,
    pub stats: CliqueStats,
    pub clique_sizes: Vec<usize>,
}

pub fn solve_decomposed(
    dp: &DecomposedProblem,
    opts: &SolverOptions,
    clock: &dyn Clock,
    observer: &mut dyn Observer,
) -> Result<SolveResult, Error> {
    let res = match opts.algorithm {
        Algorithm::Primal => solve_primal_with(dp, opts, clock, observer)?,
        Algorithm::Dual => solve_dual_with(dp, opts, clock, observer)?,
        Algorithm::Hsde => solve_hsde_with(dp, opts, clock, observer)?,
    };
    Ok(res)
}

/// Decompose and solve, timing the decomposition as part of the setup
/// phase.
pub fn solve_problem(problem: &ConicProblem, opts: &SolverOptions, observer: &mut dyn Observer) -> Result<Outcome, Error> {
    opts.validate()?;
    let clock = StdClock::new();
    let dp = decompose(problem)?;
    let decomp_s = clock.now();
    let mut result = solve_decomposed(&dp, opts, &clock, observer)?;
    result.timings.setup_s += decomp_s;
    Ok(Outcome { result, stats: CliqueStats::of(&dp), clique_sizes: dp.clique_sizes() })
}
