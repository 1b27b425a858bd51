//! Sketching operators and subspace-distortion diagnostics. The sketch of
//! interest is a plain row subset S = I(p, :); a seeded sparse-sign
//! embedding serves as the randomized baseline and Identity as the control.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::la::{back_substitute_right, singular_values, thin_qr};
use crate::rowselect::RowSelector;
use crate::scalar::Real;

/// Sparse-sign embedding with `nnz_per_col` entries of value
/// +-1/sqrt(nnz_per_col) per column; the pattern is fixed at construction
/// and fully determined by the seed.
#[derive(Debug, Clone)]
pub struct SparseSignSketch<T> {
    s: usize,
    n: usize,
    nnz_per_col: usize,
    rows: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> SparseSignSketch<T> {
    pub fn new(s: usize, n: usize, nnz_per_col: usize, seed: u64) -> Result<Self> {
        if s == 0 || n == 0 {
            return Err(Error::InvalidArgument("sparse-sign sketch needs s, n >= 1".into()));
        }
        let nnz = nnz_per_col.max(1).min(s);
        let scale = T::one() / T::from_usize(nnz).unwrap().sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n * nnz);
        let mut vals = Vec::with_capacity(n * nnz);
        let mut pool: Vec<usize> = (0..s).collect();
        for _ in 0..n {
            // Partial Fisher-Yates: nnz distinct rows per column.
            for i in 0..nnz {
                let j = rng.gen_range(i..s);
                pool.swap(i, j);
            }
            for &r in &pool[..nnz] {
                rows.push(r);
                vals.push(if rng.gen::<bool>() { scale } else { -scale });
            }
        }
        Ok(SparseSignSketch { s, n, nnz_per_col: nnz, rows, vals })
    }

    pub fn rows_out(&self) -> usize {
        self.s
    }

    pub fn nnz_per_col(&self) -> usize {
        self.nnz_per_col
    }
}

/// The sketching matrix, applied by gathering or accumulating rows.
#[derive(Debug, Clone)]
pub enum SketchOperator<T> {
    RowSubset(RowSelector),
    SparseSign(SparseSignSketch<T>),
    Identity,
}

impl<T: Real> SketchOperator<T> {
    pub fn sparse_sign(s: usize, n: usize, nnz_per_col: usize, seed: u64) -> Result<Self> {
        Ok(SketchOperator::SparseSign(SparseSignSketch::new(s, n, nnz_per_col, seed)?))
    }

    /// Output row count when applied to an `n`-row operand.
    pub fn rows_out(&self, n: usize) -> usize {
        match self {
            SketchOperator::RowSubset(p) => p.len(),
            SketchOperator::SparseSign(ss) => ss.s,
            SketchOperator::Identity => n,
        }
    }

    /// `S x` for a dense block of columns.
    pub fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        match self {
            SketchOperator::RowSubset(p) => {
                self.check_rows(x.rows())?;
                Ok(x.select_rows(p.indices()))
            }
            SketchOperator::SparseSign(ss) => {
                self.check_rows(x.rows())?;
                let mut out = DenseMatrix::zeros(ss.s, x.cols());
                for q in 0..x.cols() {
                    let xc = x.col(q);
                    let oc = out.col_mut(q);
                    for (j, &xe) in xc.iter().enumerate() {
                        for t in j * ss.nnz_per_col..(j + 1) * ss.nnz_per_col {
                            oc[ss.rows[t]] += ss.vals[t] * xe;
                        }
                    }
                }
                Ok(out)
            }
            SketchOperator::Identity => Ok(x.clone()),
        }
    }

    /// `S x` for a single vector.
    pub fn apply_vec(&self, x: &[T]) -> Result<Vec<T>> {
        match self {
            SketchOperator::RowSubset(p) => {
                self.check_rows(x.len())?;
                Ok(p.indices().iter().map(|&i| x[i]).collect())
            }
            SketchOperator::SparseSign(ss) => {
                self.check_rows(x.len())?;
                let mut out = vec![T::zero(); ss.s];
                for (j, &xe) in x.iter().enumerate() {
                    for t in j * ss.nnz_per_col..(j + 1) * ss.nnz_per_col {
                        out[ss.rows[t]] += ss.vals[t] * xe;
                    }
                }
                Ok(out)
            }
            SketchOperator::Identity => Ok(x.to_vec()),
        }
    }

    /// `S x` for a complex vector; the operator itself is real.
    pub fn apply_complex_vec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        match self {
            SketchOperator::RowSubset(p) => {
                self.check_rows(x.len())?;
                Ok(p.indices().iter().map(|&i| x[i]).collect())
            }
            SketchOperator::SparseSign(ss) => {
                self.check_rows(x.len())?;
                let mut out = vec![Complex::new(T::zero(), T::zero()); ss.s];
                for (j, xe) in x.iter().enumerate() {
                    for t in j * ss.nnz_per_col..(j + 1) * ss.nnz_per_col {
                        out[ss.rows[t]] += xe.scale(ss.vals[t]);
                    }
                }
                Ok(out)
            }
            SketchOperator::Identity => Ok(x.to_vec()),
        }
    }

    fn check_rows(&self, n: usize) -> Result<()> {
        match self {
            SketchOperator::RowSubset(p) => {
                if let Some(&mx) = p.indices().iter().max() {
                    if mx >= n {
                        return Err(Error::DimensionMismatch { expected: mx + 1, got: n });
                    }
                }
                Ok(())
            }
            SketchOperator::SparseSign(ss) => {
                if ss.n != n {
                    return Err(Error::DimensionMismatch { expected: ss.n, got: n });
                }
                Ok(())
            }
            SketchOperator::Identity => Ok(()),
        }
    }
}

/// Singular-value extremes of V, SV and the whitened basis V R^{-1}, plus
/// the sandwich constants sigma_min^2(SV)/sigma_max^2(V) and
/// sigma_max^2(SV)/sigma_min^2(V) that bracket ||SVy||^2 / ||Vy||^2.
#[derive(Debug, Clone, Copy)]
pub struct DistortionReport<T> {
    pub sigma_min_sv: T,
    pub sigma_max_sv: T,
    pub kappa_v: T,
    pub kappa_whitened: T,
    pub lower: T,
    pub upper: T,
}

/// Measures how well the sketch preserves the column space of `v`.
/// `kappa_whitened` conditions the whitened basis V R^{-1} with R taken
/// from a thin QR of S V; a rank-deficient S V surfaces as RankDeficient.
pub fn distortion_report<T: Real>(
    v: &DenseMatrix<T>,
    op: &SketchOperator<T>,
) -> Result<DistortionReport<T>> {
    let sv = op.apply(v)?;
    if sv.rows() < sv.cols() {
        return Err(Error::InvalidArgument(format!(
            "sketch keeps {} rows, fewer than the {} basis columns",
            sv.rows(),
            sv.cols()
        )));
    }
    let sig_v = singular_values(v)?;
    let sig_sv = singular_values(&sv)?;
    let (vmax, vmin) = (sig_v[0], *sig_v.last().unwrap());
    let (svmax, svmin) = (sig_sv[0], *sig_sv.last().unwrap());
    let r = thin_qr(&sv)?.r;
    let whitened = back_substitute_right(&r, v)?;
    let sig_w = singular_values(&whitened)?;
    Ok(DistortionReport {
        sigma_min_sv: svmin,
        sigma_max_sv: svmax,
        kappa_v: vmax / vmin,
        kappa_whitened: sig_w[0] / *sig_w.last().unwrap(),
        lower: (svmin * svmin) / (vmax * vmax),
        upper: (svmax * svmax) / (vmin * vmin),
    })
}
