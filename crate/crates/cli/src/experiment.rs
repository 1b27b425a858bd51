//! Problem assembly, sweep execution and CSV emission.
//!
//! Every problem yields an operator A and a start vector b.  The f(A)b
//! solvers exponentiate A directly, the linear solvers work on I - A (one
//! implicit Euler step), and the eigensolvers take A as is.  Floats are
//! printed with 17 significant digits so equal runs produce equal bytes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dskrylov::krylov::truncated_arnoldi_with;
use dskrylov::la::expm;
use dskrylov::problems::{
    augmented_exp_operator, graph_in_laplacian, grid_eval, laplacian_2d_neumann,
    preferential_attachment_edges, GridFunction, GridSpec,
};
use dskrylov::sketch::distortion_report;
use dskrylov::solvers::{
    dsfom, dsgmres, dsrr, fom_reference, gmres_reference, rr_reference, select_operator,
    SketchStrategy, SolveReport, SolverConfig,
};
use dskrylov::{CsrMat, DenseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Time step of the exponential Euler experiment.
pub const DIFFUSION_SCALE: f64 = 1.0 / 40.0;

/// Out-degree of generated preferential attachment graphs.
const GRAPH_OUT_DEGREE: usize = 4;

/// Keeps the right-hand-side stream decoupled from the graph stream.
const RHS_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

pub enum ProblemKind {
    Laplacian2d,
    ConvDiff,
    Graph,
}

pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub d: usize,
    pub diffusion: f64,
    pub graph_path: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    DsFom,
    DsGmres,
    DsRr,
    Fom,
    Gmres,
    Rr,
}

impl SolverKind {
    fn is_fom_family(self) -> bool {
        matches!(self, SolverKind::DsFom | SolverKind::Fom)
    }

    fn is_gmres_family(self) -> bool {
        matches!(self, SolverKind::DsGmres | SolverKind::Gmres)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    Deim,
    Qdeim,
    Mpe,
    Gpode,
    SparseSign,
    Identity,
}

impl StrategyChoice {
    fn to_sketch(self, nnz_per_col: usize, seed: u64) -> SketchStrategy {
        match self {
            StrategyChoice::Deim => SketchStrategy::Deim,
            StrategyChoice::Qdeim => SketchStrategy::Qdeim,
            StrategyChoice::Mpe => SketchStrategy::Mpe,
            StrategyChoice::Gpode => SketchStrategy::Gpode,
            StrategyChoice::SparseSign => SketchStrategy::SparseSign { nnz_per_col, seed },
            StrategyChoice::Identity => SketchStrategy::Identity,
        }
    }

    fn name(self) -> &'static str {
        match self {
            StrategyChoice::Deim => "deim",
            StrategyChoice::Qdeim => "qdeim",
            StrategyChoice::Mpe => "mpe",
            StrategyChoice::Gpode => "gpode",
            StrategyChoice::SparseSign => "sparsesign",
            StrategyChoice::Identity => "identity",
        }
    }
}

/// Absolute count or a per-m multiplier like `1.1x`.
#[derive(Clone, Copy, Debug)]
pub enum SRule {
    Abs(usize),
    Mul(f64),
}

impl SRule {
    fn resolve(self, m: usize) -> usize {
        match self {
            SRule::Abs(v) => v,
            SRule::Mul(f) => (f * m as f64).ceil() as usize,
        }
    }
}

pub struct SweepSpec {
    pub problem: ProblemSpec,
    pub solver: SolverKind,
    pub strategy: StrategyChoice,
    pub nnz_per_col: usize,
    pub m_list: Vec<usize>,
    pub k: usize,
    pub s_rule: Option<SRule>,
    pub strict_alg1: bool,
    pub timings: bool,
}

pub struct DistortionSpec {
    pub problem: ProblemSpec,
    pub strategies: Vec<StrategyChoice>,
    pub nnz_per_col: usize,
    pub m_list: Vec<usize>,
    pub k: usize,
    pub s_rule: Option<SRule>,
    pub strict_alg1: bool,
}

pub struct Setup {
    pub a: CsrMat,
    pub b: Vec<f64>,
    /// Exact value of exp(A) b when the problem admits one.
    pub spectral_truth: Option<Vec<f64>>,
}

fn reaction(u: &[f64]) -> Vec<f64> {
    u.iter().map(|&x| 0.25 * x * (1.0 - x)).collect()
}

pub fn build_problem(spec: &ProblemSpec) -> Result<Setup> {
    match spec.kind {
        ProblemKind::Laplacian2d => {
            let grid = GridSpec::new(spec.d, -1.0, 1.0)?;
            let u0 = grid_eval(&grid, GridFunction::GaussianBump);
            let mut l = laplacian_2d_neumann(&grid);
            l.scale(DIFFUSION_SCALE);
            let a = augmented_exp_operator(&l, &reaction(&u0))?;
            let truth = exp_euler_truth(spec.d);
            let mut b = u0;
            b.push(1.0);
            Ok(Setup { a, b, spectral_truth: Some(truth) })
        }
        ProblemKind::ConvDiff => {
            let a = dskrylov::problems::convection_diffusion(spec.d, spec.diffusion)?;
            let grid = GridSpec::new(spec.d, 0.0, 1.0)?;
            let b = grid_eval(&grid, GridFunction::PolynomialBump);
            Ok(Setup { a, b, spectral_truth: None })
        }
        ProblemKind::Graph => {
            let edges = match &spec.graph_path {
                Some(path) => {
                    let file = fs::File::open(path)
                        .with_context(|| format!("opening edge list {}", path.display()))?;
                    dskrylov::io::read_edge_list(file)?
                }
                None => preferential_attachment_edges(spec.d, GRAPH_OUT_DEGREE, spec.seed),
            };
            let (a, kept) = graph_in_laplacian(&edges)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ RHS_SEED_SALT);
            let b: Vec<f64> = (0..kept.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Ok(Setup { a, b, spectral_truth: None })
        }
    }
}

/// Eigenbasis of the 1-D Neumann second-difference matrix: column k holds
/// c_k cos((i + 1/2) k pi / d) with eigenvalue -4 sin^2(k pi / 2d).
fn cosine_basis(d: usize) -> DenseMatrix<f64> {
    let pi = std::f64::consts::PI;
    DenseMatrix::from_fn(d, d, |i, k| {
        let c = if k == 0 { (1.0 / d as f64).sqrt() } else { (2.0 / d as f64).sqrt() };
        c * (((i as f64 + 0.5) * k as f64 * pi) / d as f64).cos()
    })
}

fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-300 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// Exact exp(A)[u0; 1] for the augmented Neumann Laplacian operator, by
/// separating the Kronecker sum in the cosine eigenbasis.  Grid vectors are
/// x-fastest, so reshaping column-major turns L into U -> (T U + U T)/h^2.
fn exp_euler_truth(d: usize) -> Vec<f64> {
    let grid = GridSpec::new(d, -1.0, 1.0).expect("caller validated d");
    let h: f64 = grid.h();
    let u0 = grid_eval(&grid, GridFunction::GaussianBump);
    let g = reaction(&u0);
    let c = cosine_basis(d);
    let pi = std::f64::consts::PI;
    let lam: Vec<f64> = (0..d)
        .map(|k| {
            let s = (k as f64 * pi / (2.0 * d as f64)).sin();
            -4.0 * s * s / (h * h) * DIFFUSION_SCALE
        })
        .collect();

    let u_mat = DenseMatrix::from_col_major(d, d, u0).expect("square reshape");
    let g_mat = DenseMatrix::from_col_major(d, d, g).expect("square reshape");
    let u_hat = c.matmul_at_b(&u_mat).matmul(&c);
    let g_hat = c.matmul_at_b(&g_mat).matmul(&c);

    let mut combined =
        DenseMatrix::from_fn(d, d, |k, l| (lam[k] + lam[l]).exp() * u_hat[(k, l)]);
    let phi_part = DenseMatrix::from_fn(d, d, |k, l| phi1(lam[k] + lam[l]) * g_hat[(k, l)]);
    combined.add_assign_scaled(&phi_part, 1.0);

    let back = c.matmul(&combined).matmul(&c.transpose());
    let mut out = back.data().to_vec();
    out.push(1.0);
    out
}

fn diff_norm(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// One step of implicit Euler needs I - A.
fn shifted_identity(a: &CsrMat) -> Result<CsrMat> {
    let mut neg = a.clone();
    neg.scale(-1.0);
    Ok(neg.add_scaled_identity(1.0)?)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn sanitize(msg: &str) -> String {
    msg.replace(',', ";")
}

struct RowOk {
    s_used: usize,
    value: f64,
    rel: f64,
    report: SolveReport<f64>,
}

/// Ground truth for the f(A)b sweeps: exact when the problem provides one,
/// otherwise a reference solve with a much larger basis.
fn fom_truth(setup: &Setup, max_m: usize) -> Result<Vec<f64>, dskrylov::Error> {
    if let Some(t) = &setup.spectral_truth {
        return Ok(t.clone());
    }
    let n = setup.a.n();
    let m_truth = (2 * max_m).max(max_m + 20).min(n);
    let rep = fom_reference(&setup.a, &setup.b, m_truth, |h| expm(h))?;
    Ok(rep.vector().expect("reference returns a vector").to_vec())
}

fn run_point(
    setup: &Setup,
    system: Option<&CsrMat>,
    truth: Option<&[f64]>,
    spec: &SweepSpec,
    m: usize,
) -> Result<RowOk, dskrylov::Error> {
    let strategy = spec.strategy.to_sketch(spec.nnz_per_col, spec.problem.seed);
    let mut cfg = SolverConfig::new(m, strategy);
    cfg.k = spec.k;
    cfg.s = spec.s_rule.map(|r| r.resolve(m));
    cfg.strict_alg1 = spec.strict_alg1;

    match spec.solver {
        SolverKind::DsFom | SolverKind::Fom => {
            let truth = truth.expect("truth precomputed for the fom family");
            let reference = fom_reference(&setup.a, &setup.b, m, |h| expm(h))?;
            let ref_err = diff_norm(reference.vector().expect("vector"), truth);
            let report = if spec.solver == SolverKind::DsFom {
                dsfom(&setup.a, &setup.b, &cfg, |h| expm(h))?
            } else {
                reference
            };
            let value = diff_norm(report.vector().expect("vector"), truth);
            Ok(RowOk { s_used: report.s_used, value, rel: value / ref_err, report })
        }
        SolverKind::DsGmres | SolverKind::Gmres => {
            let sys = system.expect("system precomputed for the gmres family");
            let x0 = vec![0.0; sys.n()];
            let reference = gmres_reference(sys, &setup.b, &x0, m)?;
            let ref_res = reference.residual.expect("linear solver reports residual");
            let report = if spec.solver == SolverKind::DsGmres {
                dsgmres(sys, &setup.b, &x0, &cfg)?
            } else {
                reference
            };
            let value = report.residual.expect("linear solver reports residual");
            Ok(RowOk { s_used: report.s_used, value, rel: value / ref_res, report })
        }
        SolverKind::DsRr | SolverKind::Rr => {
            let reference = rr_reference(&setup.a, &setup.b, m)?;
            let ref_res = reference.residual.expect("eigensolver reports residual");
            let report = if spec.solver == SolverKind::DsRr {
                dsrr(&setup.a, &setup.b, &cfg)?
            } else {
                reference
            };
            let value = report.residual.expect("eigensolver reports residual");
            Ok(RowOk { s_used: report.s_used, value, rel: value / ref_res, report })
        }
    }
}

const SWEEP_HEADER: &str = "m,s,abs_error_or_residual,rel_to_reference,sigma_min_sv,kappa_v,\
kappa_whitened,bound_low,bound_high,t_basis,t_select,t_solve,unreliable,error";

/// Writes one CSV row per basis size.  Returns false when any row carries
/// an error annotation.
pub fn run_sweep(spec: &SweepSpec, out: &Path) -> Result<bool> {
    let setup = build_problem(&spec.problem)?;
    let max_m = *spec.m_list.last().expect("validated nonempty");

    let truth = if spec.solver.is_fom_family() {
        Some(fom_truth(&setup, max_m).map_err(|e| anyhow::anyhow!("ground truth: {e}"))?)
    } else {
        None
    };
    let system = if spec.solver.is_gmres_family() { Some(shifted_identity(&setup.a)?) } else { None };

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    let mut clean = true;
    for &m in &spec.m_list {
        match run_point(&setup, system.as_ref(), truth.as_deref(), spec, m) {
            Ok(row) => {
                let r = &row.report;
                let (tb, ts, tz) = if spec.timings {
                    (r.wall_times.basis, r.wall_times.select, r.wall_times.solve)
                } else {
                    (0.0, 0.0, 0.0)
                };
                let unreliable = if r.is_unreliable() { 1 } else { 0 };
                csv.push_str(&format!(
                    "{m},{},{},{},{},{},{},{},{},{},{},{},{unreliable},\n",
                    row.s_used,
                    fmt(row.value),
                    fmt(row.rel),
                    fmt(r.sigma_min_sv),
                    fmt(r.kappa_v),
                    fmt(r.kappa_whitened),
                    fmt(r.bound_low),
                    fmt(r.bound_high),
                    fmt(tb),
                    fmt(ts),
                    fmt(tz),
                ));
            }
            Err(e) => {
                clean = false;
                csv.push_str(&format!("{m},,,,,,,,,,,,,{}\n", sanitize(&e.to_string())));
            }
        }
    }
    fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    Ok(clean)
}

const DISTORTION_HEADER: &str =
    "m,strategy,s,sigma_min_sv,sigma_max_sv,kappa_v,kappa_whitened,lower,upper,error";

/// Embedding quality of each strategy on the same basis, one row per
/// (m, strategy) pair.  Returns false when any row carries an error.
pub fn run_distortion(spec: &DistortionSpec, out: &Path) -> Result<bool> {
    let setup = build_problem(&spec.problem)?;
    let n = setup.a.n();

    let mut csv = String::from(DISTORTION_HEADER);
    csv.push('\n');
    let mut clean = true;
    for &m in &spec.m_list {
        let basis = match truncated_arnoldi_with(&setup.a, &setup.b, m, spec.k, !spec.strict_alg1)
        {
            Ok(b) => b,
            Err(e) => {
                clean = false;
                for strat in &spec.strategies {
                    csv.push_str(&format!(
                        "{m},{},,,,,,,,{}\n",
                        strat.name(),
                        sanitize(&e.to_string())
                    ));
                }
                continue;
            }
        };
        for strat in &spec.strategies {
            let sketch = strat.to_sketch(spec.nnz_per_col, spec.problem.seed);
            let explicit = spec.s_rule.map(|r| r.resolve(basis.m()));
            let outcome = select_operator(&basis.v, &sketch, explicit, n, false)
                .and_then(|(op, _, s)| Ok((s, distortion_report(&basis.v, &op)?)));
            match outcome {
                Ok((s, rep)) => {
                    csv.push_str(&format!(
                        "{m},{},{s},{},{},{},{},{},{},\n",
                        strat.name(),
                        fmt(rep.sigma_min_sv),
                        fmt(rep.sigma_max_sv),
                        fmt(rep.kappa_v),
                        fmt(rep.kappa_whitened),
                        fmt(rep.lower),
                        fmt(rep.upper),
                    ));
                }
                Err(e) => {
                    clean = false;
                    csv.push_str(&format!(
                        "{m},{},,,,,,,,{}\n",
                        strat.name(),
                        sanitize(&e.to_string())
                    ));
                }
            }
        }
    }
    fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    Ok(clean)
}
