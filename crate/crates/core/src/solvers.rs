//! The three deterministically sketched solvers and their full
//! orthogonalization references. All three share one pipeline: k-truncated
//! Arnoldi basis, greedy row selection, whitening through a thin QR of the
//! sketched basis (or sketched product for the least-squares solver), then
//! a small dense solve. R factors are only ever applied by back
//! substitution.

use std::time::Instant;

use num_complex::Complex;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::krylov::{truncated_arnoldi_with, KrylovBasis};
use crate::la::{back_substitute, back_substitute_right, dense_eig, singular_values, thin_qr};
use crate::rowselect::{deim, oversample, qdeim, OversampleRule, RowSelector};
use crate::scalar::{norm2, Real};
use crate::sketch::SketchOperator;
use crate::sparse::SparseMatrix;

/// Above this whitened condition number a result is flagged unreliable
/// instead of rejected; the selection has effectively lost the subspace.
pub const UNRELIABLE_KAPPA: f64 = 1e8;

/// How the sketch rows are chosen.
#[derive(Debug, Clone)]
pub enum SketchStrategy {
    /// Interpolatory greedy, s = m.
    Deim,
    /// Pivoted-QR greedy, s = m.
    Qdeim,
    /// DEIM start, then exact secular-equation oversampling.
    Mpe,
    /// Q-DEIM start, then smallest-singular-vector oversampling.
    Gpode,
    /// Seeded sparse-sign embedding, the randomized baseline.
    SparseSign { nnz_per_col: usize, seed: u64 },
    /// No sketching; s = n.
    Identity,
    /// Caller-supplied row subset.
    Rows(RowSelector),
}

/// Shared solver parameters.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub m: usize,
    /// Arnoldi truncation window.
    pub k: usize,
    /// Sketch size; `None` picks the strategy default.
    pub s: Option<usize>,
    pub strategy: SketchStrategy,
    /// Skip the reorthogonalization pass inside the Arnoldi window.
    pub strict_alg1: bool,
}

impl SolverConfig {
    pub fn new(m: usize, strategy: SketchStrategy) -> Self {
        SolverConfig { m, k: 4, s: None, strategy, strict_alg1: false }
    }
}

/// One approximate eigenpair with its sketched residual bracket.
#[derive(Debug, Clone)]
pub struct RitzPair<T> {
    pub value: Complex<T>,
    pub vector: Vec<Complex<T>>,
    /// True residual norm `||A x - lambda x||`.
    pub residual: T,
    pub bound_low: T,
    pub bound_high: T,
}

#[derive(Debug, Clone)]
pub enum Approximation<T> {
    Vector(Vec<T>),
    Eigenpairs(Vec<RitzPair<T>>),
}

/// Which rows (or operator) the sketch ended up using.
#[derive(Debug, Clone)]
pub enum SelectorTag {
    Rows(Vec<usize>),
    SparseSign { nnz_per_col: usize, seed: u64 },
    Identity,
}

/// Wall-clock seconds per pipeline phase.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimes {
    pub basis: f64,
    pub select: f64,
    pub solve: f64,
}

/// Solution plus the diagnostics the sweep reports.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub approximation: Approximation<T>,
    pub m_used: usize,
    pub s_used: usize,
    pub selector: SelectorTag,
    /// Early-termination step of the basis build, if any.
    pub breakdown: Option<usize>,
    pub sigma_min_sv: T,
    pub kappa_v: T,
    /// Condition number of V R^{-1} with R from the solver's whitening QR.
    pub kappa_whitened: T,
    /// Scalar residual: true residual norm for the linear solver, the
    /// distinguished pair's residual for the eigensolver, absent for f(A)b.
    pub residual: Option<T>,
    pub bound_low: T,
    pub bound_high: T,
    pub wall_times: PhaseTimes,
}

impl<T: Real> SolveReport<T> {
    /// The whitened basis lost so much conditioning that digits reported
    /// alongside it cannot be trusted.
    pub fn is_unreliable(&self) -> bool {
        !(self.kappa_whitened <= T::c(UNRELIABLE_KAPPA))
    }

    pub fn vector(&self) -> Option<&[T]> {
        match &self.approximation {
            Approximation::Vector(v) => Some(v),
            Approximation::Eigenpairs(_) => None,
        }
    }

    pub fn eigenpairs(&self) -> Option<&[RitzPair<T>]> {
        match &self.approximation {
            Approximation::Eigenpairs(p) => Some(p),
            Approximation::Vector(_) => None,
        }
    }
}

fn ceil_mul(m: usize, num: usize, den: usize) -> usize {
    (m * num + den - 1) / den
}

/// Sketch size once the basis dimension is known. `rr` switches to the
/// larger eigenproblem default.
fn resolve_s(strategy: &SketchStrategy, explicit: Option<usize>, m: usize, n: usize, rr: bool) -> Result<usize> {
    let s = match strategy {
        SketchStrategy::Deim | SketchStrategy::Qdeim => {
            if let Some(s) = explicit {
                if s != m {
                    return Err(Error::InvalidArgument(format!(
                        "this selection strategy requires s = m, got s = {s} with m = {m}"
                    )));
                }
            }
            m
        }
        SketchStrategy::Mpe => explicit.unwrap_or_else(|| ceil_mul(m, if rr { 3 } else { 11 }, if rr { 2 } else { 10 }).min(n)),
        SketchStrategy::Gpode => {
            explicit.unwrap_or_else(|| if rr { ceil_mul(m, 3, 2) } else { m + 1 }.min(n))
        }
        SketchStrategy::SparseSign { .. } => {
            explicit.unwrap_or_else(|| if rr { ceil_mul(m, 3, 2) } else { 2 * m }.min(n))
        }
        SketchStrategy::Identity => n,
        SketchStrategy::Rows(p) => p.len(),
    };
    if s < m {
        return Err(Error::InvalidArgument(format!("sketch size s = {s} is below m = {m}")));
    }
    if s > n {
        return Err(Error::Exhausted { requested: s, available: n });
    }
    Ok(s)
}

/// Resolves the sketch size and constructs the operator for an already
/// built basis. `rr` switches the size defaults to the eigenproblem ones.
pub fn select_operator<T: Real>(
    v: &DenseMatrix<T>,
    strategy: &SketchStrategy,
    explicit_s: Option<usize>,
    n: usize,
    rr: bool,
) -> Result<(SketchOperator<T>, SelectorTag, usize)> {
    let m = v.cols();
    let s = resolve_s(strategy, explicit_s, m, n, rr)?;
    let (op, selector) = match strategy {
        SketchStrategy::Deim => {
            let p = deim(v)?;
            let tag = SelectorTag::Rows(p.indices().to_vec());
            (SketchOperator::RowSubset(p), tag)
        }
        SketchStrategy::Qdeim => {
            let p = qdeim(v)?;
            let tag = SelectorTag::Rows(p.indices().to_vec());
            (SketchOperator::RowSubset(p), tag)
        }
        SketchStrategy::Mpe => {
            let p = oversample(v, &deim(v)?, s, OversampleRule::Mpe)?;
            let tag = SelectorTag::Rows(p.indices().to_vec());
            (SketchOperator::RowSubset(p), tag)
        }
        SketchStrategy::Gpode => {
            let p = oversample(v, &qdeim(v)?, s, OversampleRule::Gpode)?;
            let tag = SelectorTag::Rows(p.indices().to_vec());
            (SketchOperator::RowSubset(p), tag)
        }
        SketchStrategy::SparseSign { nnz_per_col, seed } => (
            SketchOperator::sparse_sign(s, n, *nnz_per_col, *seed)?,
            SelectorTag::SparseSign { nnz_per_col: *nnz_per_col, seed: *seed },
        ),
        SketchStrategy::Identity => (SketchOperator::Identity, SelectorTag::Identity),
        SketchStrategy::Rows(p) => {
            let tag = SelectorTag::Rows(p.indices().to_vec());
            (SketchOperator::RowSubset(p.clone()), tag)
        }
    };
    Ok((op, selector, s))
}

struct Prepared<T> {
    basis: KrylovBasis<T>,
    op: SketchOperator<T>,
    selector: SelectorTag,
    s_used: usize,
    t_basis: f64,
    t_select: f64,
}

fn prepare<T: Real>(
    a: &SparseMatrix<T>,
    start: &[T],
    cfg: &SolverConfig,
    rr: bool,
) -> Result<Prepared<T>> {
    let t0 = Instant::now();
    let basis = truncated_arnoldi_with(a, start, cfg.m, cfg.k, !cfg.strict_alg1)?;
    let t_basis = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (op, selector, s) = select_operator(&basis.v, &cfg.strategy, cfg.s, a.n(), rr)?;
    let t_select = t1.elapsed().as_secs_f64();
    Ok(Prepared { basis, op, selector, s_used: s, t_basis, t_select })
}

struct WhitenDiag<T> {
    sigma_min_sv: T,
    kappa_v: T,
    sigma_min_w: T,
    sigma_max_w: T,
}

impl<T: Real> WhitenDiag<T> {
    fn kappa_whitened(&self) -> T {
        self.sigma_max_w / self.sigma_min_w
    }
}

/// Singular-value diagnostics of the basis, the sketched basis, and the
/// whitened basis V R^{-1} for the given whitening factor.
fn whiten_diagnostics<T: Real>(
    v: &DenseMatrix<T>,
    sv: &DenseMatrix<T>,
    r: &DenseMatrix<T>,
) -> Result<WhitenDiag<T>> {
    let sig_v = singular_values(v)?;
    let sig_sv = singular_values(sv)?;
    let whitened = back_substitute_right(r, v)?;
    let sig_w = singular_values(&whitened)?;
    Ok(WhitenDiag {
        sigma_min_sv: *sig_sv.last().unwrap(),
        kappa_v: sig_v[0] / *sig_v.last().unwrap(),
        sigma_min_w: *sig_w.last().unwrap(),
        sigma_max_w: sig_w[0],
    })
}

fn column<T: Real>(x: &[T]) -> DenseMatrix<T> {
    DenseMatrix::from_fn(x.len(), 1, |i, _| x[i])
}

/// Sketched FOM for f(A)b: whitens the sketched basis and evaluates
/// f_m = V R^{-1} f(Q^T S A V R^{-1}) Q^T S b.
pub fn dsfom<T: Real>(
    a: &SparseMatrix<T>,
    b: &[T],
    cfg: &SolverConfig,
    f: impl Fn(&DenseMatrix<T>) -> Result<DenseMatrix<T>>,
) -> Result<SolveReport<T>> {
    let prep = prepare(a, b, cfg, false)?;
    let t2 = Instant::now();
    let sv = prep.op.apply(&prep.basis.v)?;
    let fac = thin_qr(&sv)?;
    let diag = whiten_diagnostics(&prep.basis.v, &sv, &fac.r)?;

    let sm = prep.op.apply(&prep.basis.m_prod)?;
    let projected = back_substitute_right(&fac.r, &fac.q.matmul_at_b(&sm))?;
    let fh = f(&projected)?;
    let sb = prep.op.apply_vec(b)?;
    let rhs = fh.matvec(&fac.q.matvec_t(&sb));
    let z = back_substitute(&fac.r, &column(&rhs))?;
    let fm = prep.basis.v.matvec(z.col(0));

    Ok(SolveReport {
        approximation: Approximation::Vector(fm),
        m_used: prep.basis.m(),
        s_used: prep.s_used,
        selector: prep.selector,
        breakdown: prep.basis.breakdown,
        sigma_min_sv: diag.sigma_min_sv,
        kappa_v: diag.kappa_v,
        kappa_whitened: diag.kappa_whitened(),
        residual: None,
        bound_low: T::one(),
        bound_high: diag.kappa_whitened(),
        wall_times: PhaseTimes {
            basis: prep.t_basis,
            select: prep.t_select,
            solve: t2.elapsed().as_secs_f64(),
        },
    })
}

/// Sketched GMRES: minimizes the sketched residual over the Krylov space.
/// The whitening QR acts on the sketched product S M_m, so the reported
/// kappa_whitened conditions V against that same R.
pub fn dsgmres<T: Real>(
    a: &SparseMatrix<T>,
    b: &[T],
    x0: &[T],
    cfg: &SolverConfig,
) -> Result<SolveReport<T>> {
    if x0.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: x0.len() });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial guess must be finite".into()));
    }
    let ax0 = a.spmv(x0)?;
    let r0: Vec<T> = b.iter().zip(&ax0).map(|(&bi, &ai)| bi - ai).collect();
    let prep = prepare(a, &r0, cfg, false)?;
    let t2 = Instant::now();

    let sm = prep.op.apply(&prep.basis.m_prod)?;
    let fac = thin_qr(&sm)?;
    let sv = prep.op.apply(&prep.basis.v)?;
    let diag = whiten_diagnostics(&prep.basis.v, &sv, &fac.r)?;
    // kappa(S V R^{-1}) * kappa(V R^{-1}) and kappa(V R^{-1}) both get
    // reported; neither is asserted as a residual bound.
    let svw = back_substitute_right(&fac.r, &sv)?;
    let sig_svw = singular_values(&svw)?;
    let kappa_svw = sig_svw[0] / *sig_svw.last().unwrap();

    let sr0 = prep.op.apply_vec(&r0)?;
    let y = back_substitute(&fac.r, &column(&fac.q.matvec_t(&sr0)))?;
    let vy = prep.basis.v.matvec(y.col(0));
    let x: Vec<T> = x0.iter().zip(&vy).map(|(&x0i, &vi)| x0i + vi).collect();
    let ax = a.spmv(&x)?;
    let resid: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let rnorm = norm2(&resid);

    Ok(SolveReport {
        approximation: Approximation::Vector(x),
        m_used: prep.basis.m(),
        s_used: prep.s_used,
        selector: prep.selector,
        breakdown: prep.basis.breakdown,
        sigma_min_sv: diag.sigma_min_sv,
        kappa_v: diag.kappa_v,
        kappa_whitened: diag.kappa_whitened(),
        residual: Some(rnorm),
        bound_low: diag.kappa_whitened(),
        bound_high: kappa_svw * diag.kappa_whitened(),
        wall_times: PhaseTimes {
            basis: prep.t_basis,
            select: prep.t_select,
            solve: t2.elapsed().as_secs_f64(),
        },
    })
}

/// Sketched Rayleigh-Ritz: eigenpairs of Q^T (S M) R^{-1}, mapped back
/// through the whitened basis and normalized. Each pair carries the
/// sketched residual bracket sigma_minmax(V R^{-1}) * ||S r||.
pub fn dsrr<T: Real>(a: &SparseMatrix<T>, b: &[T], cfg: &SolverConfig) -> Result<SolveReport<T>> {
    let prep = prepare(a, b, cfg, true)?;
    let t2 = Instant::now();
    let m = prep.basis.m();
    let sv = prep.op.apply(&prep.basis.v)?;
    let fac = thin_qr(&sv)?;
    let diag = whiten_diagnostics(&prep.basis.v, &sv, &fac.r)?;

    let sm = prep.op.apply(&prep.basis.m_prod)?;
    let small = back_substitute_right(&fac.r, &fac.q.matmul_at_b(&sm))?;
    let eig = dense_eig(&small)?;

    // z_i = R^{-1} y_i, split into real and imaginary solves.
    let yr = DenseMatrix::from_fn(m, m, |i, j| eig.vector(j)[i].re);
    let yi = DenseMatrix::from_fn(m, m, |i, j| eig.vector(j)[i].im);
    let zr = back_substitute(&fac.r, &yr)?;
    let zi = back_substitute(&fac.r, &yi)?;

    let mut pairs = Vec::with_capacity(m);
    for i in 0..m {
        let z: Vec<Complex<T>> =
            (0..m).map(|t| Complex::new(zr[(t, i)], zi[(t, i)])).collect();
        let mut x = prep.basis.v.matvec_complex(&z);
        let nx = complex_norm(&x);
        for e in x.iter_mut() {
            *e = e.unscale(nx);
        }
        let lambda = eig.values[i];
        let ax = a.spmv_complex(&x)?;
        let r: Vec<Complex<T>> =
            ax.iter().zip(&x).map(|(&axe, &xe)| axe - xe * lambda).collect();
        let res = complex_norm(&r);
        let srn = complex_norm(&prep.op.apply_complex_vec(&r)?);
        pairs.push(RitzPair {
            value: lambda,
            vector: x,
            residual: res,
            bound_low: diag.sigma_min_w * srn,
            bound_high: diag.sigma_max_w * srn,
        });
    }

    // Scalar summary: the pair with the second-smallest magnitude, the one
    // of interest when the smallest eigenvalue is structurally zero.
    let summary = summary_pair(&pairs);
    let (res, blo, bhi) = pairs
        .get(summary)
        .map(|p| (p.residual, p.bound_low, p.bound_high))
        .unwrap_or((T::zero(), T::zero(), T::zero()));

    Ok(SolveReport {
        approximation: Approximation::Eigenpairs(pairs),
        m_used: m,
        s_used: prep.s_used,
        selector: prep.selector,
        breakdown: prep.basis.breakdown,
        sigma_min_sv: diag.sigma_min_sv,
        kappa_v: diag.kappa_v,
        kappa_whitened: diag.kappa_whitened(),
        residual: Some(res),
        bound_low: blo,
        bound_high: bhi,
        wall_times: PhaseTimes {
            basis: prep.t_basis,
            select: prep.t_select,
            solve: t2.elapsed().as_secs_f64(),
        },
    })
}

/// Index of the pair with the second-smallest |lambda| (or the only pair).
pub fn summary_pair<T: Real>(pairs: &[RitzPair<T>]) -> usize {
    if pairs.is_empty() {
        return 0;
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&i, &j| {
        pairs[i].value.norm_sqr().partial_cmp(&pairs[j].value.norm_sqr()).unwrap()
    });
    order[1.min(pairs.len() - 1)]
}

fn complex_norm<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
}

/// V^T M with the below-subdiagonal entries pinned to exact zeros; for an
/// orthonormal Arnoldi basis this is the Hessenberg projection.
fn hessenberg_projection<T: Real>(basis: &KrylovBasis<T>) -> DenseMatrix<T> {
    let mut h = basis.v.matmul_at_b(&basis.m_prod);
    let m = h.cols();
    for j in 0..m {
        for i in j + 2..m {
            h[(i, j)] = T::zero();
        }
    }
    h
}

fn reference_prepared<T: Real>(
    a: &SparseMatrix<T>,
    start: &[T],
    m: usize,
) -> Result<(KrylovBasis<T>, f64)> {
    let t0 = Instant::now();
    let basis = truncated_arnoldi_with(a, start, m, m, true)?;
    Ok((basis, t0.elapsed().as_secs_f64()))
}

fn reference_report<T: Real>(
    approximation: Approximation<T>,
    basis: &KrylovBasis<T>,
    residual: Option<T>,
    bounds: (T, T),
    t_basis: f64,
    t_solve: f64,
) -> Result<SolveReport<T>> {
    let sig_v = singular_values(&basis.v)?;
    Ok(SolveReport {
        approximation,
        m_used: basis.m(),
        s_used: basis.v.rows(),
        selector: SelectorTag::Identity,
        breakdown: basis.breakdown,
        sigma_min_sv: *sig_v.last().unwrap(),
        kappa_v: sig_v[0] / *sig_v.last().unwrap(),
        // Orthonormal basis: whitening would be the identity.
        kappa_whitened: T::one(),
        residual,
        bound_low: bounds.0,
        bound_high: bounds.1,
        wall_times: PhaseTimes { basis: t_basis, select: 0.0, solve: t_solve },
    })
}

/// Classical FOM over a fully orthogonalized basis: V f(V^T A V) V^T b.
pub fn fom_reference<T: Real>(
    a: &SparseMatrix<T>,
    b: &[T],
    m: usize,
    f: impl Fn(&DenseMatrix<T>) -> Result<DenseMatrix<T>>,
) -> Result<SolveReport<T>> {
    let (basis, t_basis) = reference_prepared(a, b, m)?;
    let t1 = Instant::now();
    let h = hessenberg_projection(&basis);
    let fh = f(&h)?;
    let fm = basis.v.matvec(&fh.matvec(&basis.v.matvec_t(b)));
    reference_report(
        Approximation::Vector(fm),
        &basis,
        None,
        (T::one(), T::one()),
        t_basis,
        t1.elapsed().as_secs_f64(),
    )
}

/// Classical GMRES: exact least squares over the same Krylov space.
pub fn gmres_reference<T: Real>(
    a: &SparseMatrix<T>,
    b: &[T],
    x0: &[T],
    m: usize,
) -> Result<SolveReport<T>> {
    if x0.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: x0.len() });
    }
    let ax0 = a.spmv(x0)?;
    let r0: Vec<T> = b.iter().zip(&ax0).map(|(&bi, &ai)| bi - ai).collect();
    let (basis, t_basis) = reference_prepared(a, &r0, m)?;
    let t1 = Instant::now();
    let fac = thin_qr(&basis.m_prod)?;
    let y = back_substitute(&fac.r, &column(&fac.q.matvec_t(&r0)))?;
    let vy = basis.v.matvec(y.col(0));
    let x: Vec<T> = x0.iter().zip(&vy).map(|(&x0i, &vi)| x0i + vi).collect();
    let ax = a.spmv(&x)?;
    let resid: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let rnorm = norm2(&resid);
    reference_report(
        Approximation::Vector(x),
        &basis,
        Some(rnorm),
        (T::one(), T::one()),
        t_basis,
        t1.elapsed().as_secs_f64(),
    )
}

/// Classical Rayleigh-Ritz on the Hessenberg projection.
pub fn rr_reference<T: Real>(a: &SparseMatrix<T>, b: &[T], m: usize) -> Result<SolveReport<T>> {
    let (basis, t_basis) = reference_prepared(a, b, m)?;
    let t1 = Instant::now();
    let h = hessenberg_projection(&basis);
    let eig = dense_eig(&h)?;
    let mu = basis.m();
    let mut pairs = Vec::with_capacity(mu);
    for i in 0..mu {
        let mut x = basis.v.matvec_complex(eig.vector(i));
        let nx = complex_norm(&x);
        for e in x.iter_mut() {
            *e = e.unscale(nx);
        }
        let lambda = eig.values[i];
        let ax = a.spmv_complex(&x)?;
        let r: Vec<Complex<T>> =
            ax.iter().zip(&x).map(|(&axe, &xe)| axe - xe * lambda).collect();
        let res = complex_norm(&r);
        // S = I: the bracket collapses onto the residual itself.
        pairs.push(RitzPair { value: lambda, vector: x, residual: res, bound_low: res, bound_high: res });
    }
    let summary = summary_pair(&pairs);
    let (res, blo, bhi) = pairs
        .get(summary)
        .map(|p| (p.residual, p.bound_low, p.bound_high))
        .unwrap_or((T::zero(), T::zero(), T::zero()));
    reference_report(
        Approximation::Eigenpairs(pairs),
        &basis,
        Some(res),
        (blo, bhi),
        t_basis,
        t1.elapsed().as_secs_f64(),
    )
}
