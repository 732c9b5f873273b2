//! Benchmark sweeps: fixed-iteration solves over generated or file-based
//! instances, one CSV row per instance.
//!
//! A sweep config (TOML, or JSON when the file ends in `.json`) looks like
//!
//! ```toml
//! algorithm = "hsde"      # primal | dual | hsde
//! iterations = 100        # iterations timed per instance
//! repeats = 1             # solves per instance; times are averaged
//! files = ["data/theta1.dat-s"]
//!
//! [[block_arrow]]         # cartesian product of the lists
//! blocks = [20, 40, 80]
//! block_size = 10
//! arrow = 20
//! m = 200
//! seed = 1
//!
//! [[random_chordal]]
//! n = [40, 80]
//! m = 10
//! spread = 2
//! seed = [1, 2]
//! ```
//!
//! The solver runs with a tolerance of zero so every instance performs
//! exactly `iterations` iterations (unless infeasibility is detected).

use std::path::Path;

use cliquesdp_core::flops::{flops_affine, flops_conic};
use cliquesdp_core::kkt::KktMode;
use cliquesdp_core::{Algorithm, ConicProblem, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::generate::{gen_block_arrow, gen_random_chordal, BlockArrowSpec, RandomChordalSpec};
use crate::run::solve_problem;
use crate::sdpa::read_sdpa;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(u64),
    Many(Vec<u64>),
}

impl Values {
    fn list(&self) -> Vec<u64> {
        match self {
            Values::One(v) => vec![*v],
            Values::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockArrowSweep {
    pub blocks: Values,
    pub block_size: Values,
    pub arrow: Values,
    pub m: Values,
    #[serde(default = "default_seed")]
    pub seed: Values,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomChordalSweep {
    pub n: Values,
    pub m: Values,
    #[serde(default = "default_spread")]
    pub spread: Values,
    #[serde(default = "default_seed")]
    pub seed: Values,
}

fn default_seed() -> Values {
    Values::One(0)
}

fn default_spread() -> Values {
    Values::One(2)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub rescale: Option<bool>,
    #[serde(default)]
    pub block_arrow: Vec<BlockArrowSweep>,
    #[serde(default)]
    pub random_chordal: Vec<RandomChordalSweep>,
    #[serde(default)]
    pub files: Vec<String>,
}

fn default_algorithm() -> String {
    "hsde".into()
}

fn default_iterations() -> usize {
    100
}

fn default_repeats() -> usize {
    1
}

pub fn parse_algorithm(name: &str) -> Result<Algorithm, Error> {
    match name {
        "primal" => Ok(Algorithm::Primal),
        "dual" => Ok(Algorithm::Dual),
        "hsde" => Ok(Algorithm::Hsde),
        other => Err(Error::InvalidSpec(format!("unknown algorithm `{other}` (expected primal, dual or hsde)"))),
    }
}

impl SweepConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            Ok(toml::from_str(&text)?)
        }
    }

    /// Every instance of the sweep, in config order.
    pub fn instances(&self) -> Vec<Instance> {
        let mut out = Vec::new();
        for s in &self.block_arrow {
            for l in s.blocks.list() {
                for d in s.block_size.list() {
                    for h in s.arrow.list() {
                        for m in s.m.list() {
                            for seed in s.seed.list() {
                                let spec = BlockArrowSpec { l: l as usize, d: d as usize, h: h as usize, m: m as usize, seed };
                                out.push(Instance::BlockArrow(spec));
                            }
                        }
                    }
                }
            }
        }
        for s in &self.random_chordal {
            for n in s.n.list() {
                for m in s.m.list() {
                    for spread in s.spread.list() {
                        for seed in s.seed.list() {
                            let spec = RandomChordalSpec { n: n as usize, m: m as usize, spread: spread as usize, seed };
                            out.push(Instance::RandomChordal(spec));
                        }
                    }
                }
            }
        }
        out.extend(self.files.iter().cloned().map(Instance::File));
        out
    }

    pub fn options(&self) -> Result<SolverOptions, Error> {
        if self.iterations == 0 || self.repeats == 0 {
            return Err(Error::InvalidSpec("iterations and repeats must be at least 1".into()));
        }
        Ok(SolverOptions {
            algorithm: parse_algorithm(&self.algorithm)?,
            max_iter: self.iterations,
            eps_tol: f64::MIN_POSITIVE,
            rescale: self.rescale.unwrap_or(true),
            ..SolverOptions::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    BlockArrow(BlockArrowSpec),
    RandomChordal(RandomChordalSpec),
    File(String),
}

impl Instance {
    pub fn label(&self) -> String {
        match self {
            Instance::BlockArrow(s) => format!("block-arrow l={} d={} h={} m={} seed={}", s.l, s.d, s.h, s.m, s.seed),
            Instance::RandomChordal(s) => format!("random-chordal n={} m={} spread={} seed={}", s.n, s.m, s.spread, s.seed),
            Instance::File(p) => p.clone(),
        }
    }

    pub fn build(&self) -> Result<ConicProblem, Error> {
        match self {
            Instance::BlockArrow(s) => gen_block_arrow(s),
            Instance::RandomChordal(s) => gen_random_chordal(s),
            Instance::File(p) => read_sdpa(p),
        }
    }
}

/// One CSV row. Column order is the field order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub max_clique: usize,
    pub min_clique: usize,
    pub nd: usize,
    pub algorithm: String,
    pub status: String,
    pub iterations: usize,
    pub setup_s: f64,
    pub factor_s: f64,
    pub iterate_s: f64,
    pub time_per_iter_s: f64,
    pub affine_per_iter_s: f64,
    pub conic_per_iter_s: f64,
    pub flops_affine: u128,
    pub flops_conic: u128,
}

pub fn bench_problem(label: &str, problem: &ConicProblem, opts: &SolverOptions, repeats: usize) -> Result<BenchRow, Error> {
    let mut acc = [0.0f64; 5];
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let out = solve_problem(problem, opts, &mut ())?;
        let t = out.result.timings;
        let it = out.result.iterations.max(1) as f64;
        for (a, v) in acc.iter_mut().zip([t.setup_s, t.factor_s, t.iterate_s / it, t.affine_s / it, t.conic_s / it]) {
            *a += v;
        }
        last = Some(out);
    }
    let out = last.expect("at least one repeat");
    let r = repeats.max(1) as f64;
    let [setup_s, factor_s, per_iter, affine, conic] = acc.map(|v| v / r);
    let s = out.stats;
    let mode = if opts.algorithm == Algorithm::Hsde { KktMode::Hsde } else { KktMode::PrimalDual };
    Ok(BenchRow {
        instance: label.to_owned(),
        n: s.n,
        m: s.m,
        p: s.p,
        max_clique: s.max_clique,
        min_clique: s.min_clique,
        nd: s.nd,
        algorithm: crate::report::algorithm_name(opts.algorithm).to_owned(),
        status: out.result.status.as_str().to_owned(),
        iterations: out.result.iterations,
        setup_s,
        factor_s,
        iterate_s: per_iter * out.result.iterations as f64,
        time_per_iter_s: per_iter,
        affine_per_iter_s: affine,
        conic_per_iter_s: conic,
        flops_affine: flops_affine(s.n as u64, s.m as u64, s.p as u64, s.nd as u64, mode),
        flops_conic: flops_conic(&out.clique_sizes),
    })
}

/// Run every instance of the sweep. An empty sweep is an error.
pub fn run_sweep(cfg: &SweepConfig, mut progress: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>, Error> {
    let instances = cfg.instances();
    if instances.is_empty() {
        return Err(Error::InvalidSpec("sweep contains no instances".into()));
    }
    let opts = cfg.options()?;
    let mut rows = Vec::with_capacity(instances.len());
    for inst in &instances {
        let problem = inst.build()?;
        let row = bench_problem(&inst.label(), &problem, &opts, cfg.repeats)?;
        progress(&row);
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_csv(rows: &[BenchRow], out: impl std::io::Write) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
