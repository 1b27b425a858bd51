//! Command line driver for solver sweeps and sketching diagnostics.
//!
//! Two subcommands: `sweep` runs one solver over a list of basis sizes and
//! writes one CSV row per size; `distortion` skips the solve and reports the
//! subspace embedding quality of each requested sketching strategy.  Output
//! is byte-reproducible for a fixed configuration and seed as long as
//! `--timings` stays off.

mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use experiment::{
    DistortionSpec, ProblemKind, ProblemSpec, SRule, SolverKind, StrategyChoice, SweepSpec,
};

#[derive(Parser)]
#[command(name = "dskrylov", version, about = "Sketched Krylov solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver across a list of basis sizes, one CSV row per size.
    Sweep(SweepArgs),
    /// Report sketch distortion per basis size and strategy.
    Distortion(DistortionArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Test problem family.
    #[arg(long, value_enum)]
    problem: Problem,

    /// Grid side length, or node count for generated graphs.
    #[arg(long, default_value_t = 16)]
    d: usize,

    /// Diffusion coefficient of the convection-diffusion operator.
    #[arg(long, default_value_t = 1e-3)]
    diffusion: f64,

    /// Edge list file for the graph problem; generated when absent.
    #[arg(long)]
    graph_path: Option<PathBuf>,

    /// Seed for generated graphs, right-hand sides and sparse sign sketches.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// Solver to sweep; the ds variants sketch, the others are references.
    #[arg(long, value_enum)]
    solver: Solver,

    /// Sketching strategy for the ds solvers.
    #[arg(long, value_enum, default_value_t = Strategy::Deim)]
    strategy: Strategy,

    /// Comma separated basis sizes, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,

    /// Arnoldi truncation window.
    #[arg(long, default_value_t = 4)]
    k: usize,

    /// Sketch size: an absolute count like `40` or a multiplier like `1.1x`.
    #[arg(long, value_parser = parse_s_rule)]
    s: Option<SRule>,

    /// Nonzeros per column of the sparse sign sketch.
    #[arg(long, default_value_t = 8)]
    nnz_per_col: usize,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,

    /// Drop the second orthogonalization pass in the truncated Arnoldi loop.
    #[arg(long)]
    strict_alg1: bool,

    /// Report wall clock phase times instead of zeros (breaks reproducibility).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct DistortionArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// Comma separated strategies to compare.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "deim")]
    strategy: Vec<Strategy>,

    /// Comma separated basis sizes, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,

    /// Arnoldi truncation window.
    #[arg(long, default_value_t = 4)]
    k: usize,

    /// Sketch size rule applied to every strategy.
    #[arg(long, value_parser = parse_s_rule)]
    s: Option<SRule>,

    /// Nonzeros per column of the sparse sign sketch.
    #[arg(long, default_value_t = 8)]
    nnz_per_col: usize,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,

    /// Drop the second orthogonalization pass in the truncated Arnoldi loop.
    #[arg(long)]
    strict_alg1: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Laplacian2d,
    Convdiff,
    Graph,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Dsfom,
    Dsgmres,
    Dsrr,
    Fom,
    Gmres,
    Rr,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Deim,
    Qdeim,
    Mpe,
    Gpode,
    Sparsesign,
    Identity,
}

fn parse_s_rule(text: &str) -> Result<SRule, String> {
    if let Some(head) = text.strip_suffix('x') {
        let f: f64 = head.parse().map_err(|_| format!("bad sketch multiplier `{text}`"))?;
        if !f.is_finite() || f < 1.0 {
            return Err(format!("sketch multiplier must be at least 1, got `{text}`"));
        }
        Ok(SRule::Mul(f))
    } else {
        text.parse::<usize>().map(SRule::Abs).map_err(|_| {
            format!("sketch size must be a count or a `1.1x` style multiplier, got `{text}`")
        })
    }
}

fn check_m_list(m: &[usize]) -> Result<()> {
    if m.is_empty() {
        bail!("at least one basis size is required");
    }
    for w in m.windows(2) {
        if w[1] <= w[0] {
            bail!("basis sizes must be strictly increasing, got {} then {}", w[0], w[1]);
        }
    }
    if m[0] == 0 {
        bail!("basis sizes must be positive");
    }
    Ok(())
}

fn problem_spec(args: &ProblemArgs) -> ProblemSpec {
    ProblemSpec {
        kind: match args.problem {
            Problem::Laplacian2d => ProblemKind::Laplacian2d,
            Problem::Convdiff => ProblemKind::ConvDiff,
            Problem::Graph => ProblemKind::Graph,
        },
        d: args.d,
        diffusion: args.diffusion,
        graph_path: args.graph_path.clone(),
        seed: args.seed,
    }
}

fn strategy_choice(s: Strategy) -> StrategyChoice {
    match s {
        Strategy::Deim => StrategyChoice::Deim,
        Strategy::Qdeim => StrategyChoice::Qdeim,
        Strategy::Mpe => StrategyChoice::Mpe,
        Strategy::Gpode => StrategyChoice::Gpode,
        Strategy::Sparsesign => StrategyChoice::SparseSign,
        Strategy::Identity => StrategyChoice::Identity,
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(args) => {
            check_m_list(&args.m)?;
            let spec = SweepSpec {
                problem: problem_spec(&args.problem),
                solver: match args.solver {
                    Solver::Dsfom => SolverKind::DsFom,
                    Solver::Dsgmres => SolverKind::DsGmres,
                    Solver::Dsrr => SolverKind::DsRr,
                    Solver::Fom => SolverKind::Fom,
                    Solver::Gmres => SolverKind::Gmres,
                    Solver::Rr => SolverKind::Rr,
                },
                strategy: strategy_choice(args.strategy),
                nnz_per_col: args.nnz_per_col,
                m_list: args.m,
                k: args.k,
                s_rule: args.s,
                strict_alg1: args.strict_alg1,
                timings: args.timings,
            };
            experiment::run_sweep(&spec, &args.out)
        }
        Command::Distortion(args) => {
            check_m_list(&args.m)?;
            let spec = DistortionSpec {
                problem: problem_spec(&args.problem),
                strategies: args.strategy.iter().map(|&s| strategy_choice(s)).collect(),
                nnz_per_col: args.nnz_per_col,
                m_list: args.m,
                k: args.k,
                s_rule: args.s,
                strict_alg1: args.strict_alg1,
            };
            experiment::run_distortion(&spec, &args.out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        // Some sweep rows carry an error annotation.
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
