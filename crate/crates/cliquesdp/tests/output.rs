use cliquesdp::bench::{bench_problem, run_sweep, write_csv, Instance, SweepConfig};
use cliquesdp::generate::{gen_block_arrow, BlockArrowSpec};
use cliquesdp::report::{write_result_json, ResultReport, SCHEMA_VERSION};
use cliquesdp::run::{solve_problem, CsvTrace, TRACE_HEADER};
use cliquesdp_core::{ConeSpec, ConicProblem, DataEntry, SolverOptions, Status};

fn small() -> ConicProblem {
    gen_block_arrow(&BlockArrowSpec { l: 3, d: 3, h: 2, m: 4, seed: 5 }).unwrap()
}

#[test]
fn optimal_result_round_trips_through_json() {
    let opts = SolverOptions::default();
    let out = solve_problem(&small(), &opts, &mut ()).unwrap();
    assert_eq!(out.result.status, Status::Optimal);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_result_json(&out.result, &opts, out.stats, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed = ResultReport::from_json(&text).unwrap();
    assert_eq!(parsed, ResultReport::new(&out.result, &opts, out.stats));
    assert_eq!(parsed.schema, SCHEMA_VERSION);
    assert_eq!(parsed.status, "optimal");
    assert_eq!(parsed.cliques.p, 3);
    assert_eq!(parsed.cliques.max_clique, 5);
    assert!(parsed.certificate.is_none());
    let t = &parsed.timings;
    assert!([t.setup_s, t.factor_s, t.iterate_s, t.completion_s, t.affine_s, t.conic_s].iter().all(|&v| v >= 0.0));
    // the raw JSON carries the documented top-level keys
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["schema", "status", "primal_objective", "dual_objective", "residuals", "iterations", "timings", "options", "cliques"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn infeasible_result_carries_certificate() {
    let p = ConicProblem::new(
        vec![ConeSpec::Psd(2)],
        vec![
            DataEntry { mat: 0, block: 0, i: 0, j: 0, value: 1.0 },
            DataEntry { mat: 1, block: 0, i: 0, j: 0, value: 1.0 },
        ],
        vec![-1.0],
    );
    let opts = SolverOptions::default();
    let out = solve_problem(&p, &opts, &mut ()).unwrap();
    assert_eq!(out.result.status, Status::PrimalInfeasible);
    let rep = ResultReport::new(&out.result, &opts, out.stats);
    let cert = rep.certificate.as_ref().unwrap();
    assert_eq!(cert.kind, "primal_infeasible");
    assert_eq!(cert.vector.len(), 1);
    let back = ResultReport::from_json(&rep.to_json().unwrap()).unwrap();
    assert_eq!(back, rep);
}

#[test]
fn trace_rows_increase_and_are_finite() {
    let mut buf = Vec::new();
    let mut trace = CsvTrace::new(&mut buf).unwrap();
    let out = solve_problem(&small(), &SolverOptions::default(), &mut trace).unwrap();
    trace.finish().unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), TRACE_HEADER);
    let rows: Vec<Vec<f64>> = rd.records().map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    assert!(!rows.is_empty());
    assert!(rows.len() <= out.result.iterations);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn sweep_configs_in_toml_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("s.toml");
    std::fs::write(
        &toml_path,
        "iterations = 5\n[[block_arrow]]\nblocks = [2, 3]\nblock_size = 3\narrow = [1, 2]\nm = 2\nseed = 4\n\n[[random_chordal]]\nn = 8\nm = 2\n",
    )
    .unwrap();
    let cfg = SweepConfig::load(&toml_path).unwrap();
    assert_eq!(cfg.instances().len(), 5);
    let json_path = dir.path().join("s.json");
    std::fs::write(&json_path, r#"{"algorithm": "primal", "iterations": 5, "block_arrow": [{"blocks": 2, "block_size": 3, "arrow": 1, "m": 2}]}"#).unwrap();
    let cfg_json = SweepConfig::load(&json_path).unwrap();
    assert_eq!(cfg_json.instances(), vec![Instance::BlockArrow(BlockArrowSpec { l: 2, d: 3, h: 1, m: 2, seed: 0 })]);

    let mut seen = 0;
    let rows = run_sweep(&cfg, |_| seen += 1).unwrap();
    assert_eq!(seen, 5);
    assert!(rows.iter().all(|r| r.iterations == 5 && r.time_per_iter_s >= 0.0 && r.flops_affine > 0 && r.flops_conic > 0));
    let mut out = Vec::new();
    write_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with(
        "instance,n,m,p,max_clique,min_clique,nd,algorithm,status,iterations,setup_s,factor_s,iterate_s,time_per_iter_s,affine_per_iter_s,conic_per_iter_s,flops_affine,flops_conic\n"
    ));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn empty_or_invalid_sweeps_are_rejected() {
    let cfg: SweepConfig = toml::from_str("iterations = 5").unwrap();
    assert!(run_sweep(&cfg, |_| ()).is_err());
    let cfg: SweepConfig = toml::from_str("algorithm = \"newton\"\nfiles = [\"x\"]").unwrap();
    assert!(cfg.options().is_err());
    assert!(toml::from_str::<SweepConfig>("bogus = 1").is_err());
    // a top-level key written after a table header lands in that table
    assert!(toml::from_str::<SweepConfig>("[[random_chordal]]\nn = 5\nm = 1\nfiles = [\"x\"]").is_err());
}

#[test]
fn documented_example_config_parses() {
    let readme = include_str!("../../../README.md");
    let start = readme.find("```toml\n").unwrap() + 8;
    let text = &readme[start..start + readme[start..].find("```").unwrap()];
    let cfg: SweepConfig = toml::from_str(text).unwrap();
    assert_eq!(cfg.files.len(), 1);
    assert_eq!(cfg.instances().len(), 4 + 4 + 1);
    assert!(cfg.options().is_ok());
}

#[test]
fn bench_row_matches_decomposition() {
    let opts = SolverOptions { max_iter: 3, eps_tol: f64::MIN_POSITIVE, ..SolverOptions::default() };
    let row = bench_problem("x", &small(), &opts, 2).unwrap();
    assert_eq!((row.n, row.m, row.p, row.max_clique, row.min_clique), (11, 4, 3, 5, 5));
    assert_eq!(row.iterations, 3);
    assert_eq!(row.flops_conic, 3 * 125);
}
