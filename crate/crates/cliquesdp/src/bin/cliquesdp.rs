use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cliquesdp::bench::{run_sweep, write_csv, SweepConfig};
use cliquesdp::generate::{gen_block_arrow, gen_random_chordal, BlockArrowSpec, RandomChordalSpec};
use cliquesdp::report::write_result_json;
use cliquesdp::run::{solve_problem, CsvTrace, Outcome};
use cliquesdp::sdpa::{read_sdpa, write_sdpa};
use cliquesdp::Error;
use cliquesdp_core::admm::AdaptiveRho;
use cliquesdp_core::{Algorithm, SolverOptions, Status};

#[derive(Parser)]
#[command(name = "cliquesdp", version, about = "Sparse SDP solver based on chordal decomposition and ADMM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem in SDPA sparse format.
    Solve(SolveArgs),
    /// Write a generated problem in SDPA sparse format.
    #[command(subcommand)]
    Generate(Generate),
    /// Run a benchmark sweep and write CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Primal,
    Dual,
    Hsde,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "hsde")]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 2000)]
    maxiter: usize,
    /// Initial penalty (primal and dual engines).
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long)]
    no_adaptive: bool,
    #[arg(long)]
    no_scale: bool,
    /// Project clique blocks in parallel.
    #[arg(long)]
    parallel: bool,
    /// Check the embedding invariants at every iteration (hsde only).
    #[arg(long)]
    check_invariants: bool,
    /// Write the result JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write per-iteration residuals as CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Generate {
    /// Block-arrow pattern with `blocks` diagonal blocks and an arrow head.
    BlockArrow {
        #[arg(long)]
        blocks: usize,
        #[arg(long)]
        block_size: usize,
        #[arg(long)]
        arrow: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Random chordal pattern (intersection graph of random subtrees).
    RandomChordal {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Growth steps per subtree; larger means denser.
        #[arg(long, default_value_t = 2)]
        spread: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Sweep config (TOML, or JSON with a `.json` extension).
    config: PathBuf,
    /// CSV output; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Generate(g) => generate(g).map(|_| 0),
        Command::Bench(args) => bench(args).map(|_| 0),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn solve(args: SolveArgs) -> Result<u8, Error> {
    let problem = read_sdpa(&args.file)?;
    let opts = SolverOptions {
        eps_tol: args.eps,
        max_iter: args.maxiter,
        rho: args.rho,
        adaptive: AdaptiveRho { enabled: !args.no_adaptive, ..AdaptiveRho::default() },
        rescale: !args.no_scale,
        algorithm: match args.algorithm {
            AlgorithmArg::Primal => Algorithm::Primal,
            AlgorithmArg::Dual => Algorithm::Dual,
            AlgorithmArg::Hsde => Algorithm::Hsde,
        },
        parallel_projections: args.parallel,
        check_invariants: args.check_invariants,
        complete: false,
    };
    let out = match &args.trace {
        Some(path) => {
            let mut trace = CsvTrace::new(BufWriter::new(File::create(path)?))?;
            let out = solve_problem(&problem, &opts, &mut trace)?;
            trace.finish()?;
            out
        }
        None => solve_problem(&problem, &opts, &mut ())?,
    };
    print_summary(&out);
    if let Some(path) = &args.json {
        write_result_json(&out.result, &opts, out.stats, path)?;
    }
    Ok(match out.result.status {
        Status::Optimal => 0,
        Status::PrimalInfeasible | Status::DualInfeasible => 2,
        Status::MaxIterations => 3,
    })
}

fn print_summary(out: &Outcome) {
    let r = &out.result;
    let s = &out.stats;
    let t = &r.timings;
    let rs = &r.residuals;
    println!("status      {}", r.status.as_str());
    println!("objective   primal {:.8e}  dual {:.8e}", r.primal_objective, r.dual_objective);
    println!(
        "residuals   eps_p {:.2e}  eps_d {:.2e}  eps_g {:.2e}  eps_c {:.2e}  eps_alpha {:.2e}",
        rs.eps_p, rs.eps_d, rs.eps_g, rs.eps_c, rs.eps_alpha
    );
    println!("iterations  {}", r.iterations);
    println!(
        "time        {:.3}s  (setup {:.3}s, factor {:.3}s, iterate {:.3}s, complete {:.3}s)",
        t.setup_s + t.factor_s + t.iterate_s + t.completion_s,
        t.setup_s,
        t.factor_s,
        t.iterate_s,
        t.completion_s
    );
    println!("cliques     p {}  max {}  min {}  (n {}, m {})", s.p, s.max_clique, s.min_clique, s.n, s.m);
    if r.rank_warning {
        println!("warning     constraint matrix looks rank deficient");
    }
    if let Some(inv) = &r.invariants {
        println!(
            "invariants  {} iterations checked, {} failures (cone {:.1e}/{:.1e}, compl {:.1e})",
            inv.iterations_checked, inv.failures, inv.max_u_violation, inv.max_v_violation, inv.max_complementarity
        );
    }
}

fn generate(g: Generate) -> Result<(), Error> {
    let (problem, output) = match g {
        Generate::BlockArrow { blocks, block_size, arrow, m, seed, output } => {
            (gen_block_arrow(&BlockArrowSpec { l: blocks, d: block_size, h: arrow, m, seed })?, output)
        }
        Generate::RandomChordal { n, m, spread, seed, output } => {
            (gen_random_chordal(&RandomChordalSpec { n, m, spread, seed })?, output)
        }
    };
    write_sdpa(&problem, output)
}

fn bench(args: BenchArgs) -> Result<(), Error> {
    let cfg = SweepConfig::load(&args.config)?;
    let rows = run_sweep(&cfg, |row| {
        eprintln!("{}: {:.3e} s/iter ({} iterations)", row.instance, row.time_per_iter_s, row.iterations);
    })?;
    match &args.output {
        Some(path) => write_csv(&rows, BufWriter::new(File::create(path)?)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&rows, &mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}
