//! Householder QR, with and without column pivoting, plus the triangular
//! solves everything downstream uses instead of forming inverses.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Thin QR factors: `q` has orthonormal columns, `r` is upper triangular
/// (upper trapezoidal for wide inputs) with nonnegative diagonal.
#[derive(Debug, Clone)]
pub struct QrFactors<T> {
    pub q: DenseMatrix<T>,
    pub r: DenseMatrix<T>,
}

/// Relative threshold under which an R diagonal counts as a rank drop.
pub const RANK_TOL: f64 = 1e-14;

/// Householder vector for `x`, returning `(v, beta, r00)` such that
/// `(I - beta v v^T) x = r00 e1` with `r00 >= 0`.
pub(crate) fn householder<T: Real>(x: &[T]) -> (Vec<T>, T, T) {
    let norm = crate::scalar::norm2(x);
    if norm == T::zero() {
        return (vec![T::zero(); x.len()], T::zero(), T::zero());
    }
    let mut v: Vec<T> = x.to_vec();
    // Reflect onto -sign(x0) * norm * e1 for stability, then flip the sign
    // so the produced diagonal entry is nonnegative.
    let alpha = if x[0] >= T::zero() { -norm } else { norm };
    v[0] -= alpha;
    let vnorm2 = crate::scalar::dot(&v, &v);
    if vnorm2 == T::zero() {
        // x is already a nonnegative multiple of e1.
        return (vec![T::zero(); x.len()], T::zero(), x[0]);
    }
    let beta = T::c(2.0) / vnorm2;
    // (I - beta vv^T)x = alpha e1; record |alpha| and let the caller flip
    // the reflected column when alpha < 0.
    (v, beta, alpha)
}

/// Applies `(I - beta v v^T)` to the subcolumn `col[offset..]`.
pub(crate) fn apply_householder<T: Real>(col: &mut [T], v: &[T], beta: T) {
    if beta == T::zero() {
        return;
    }
    let s = crate::scalar::dot(v, col) * beta;
    for (c, &vi) in col.iter_mut().zip(v) {
        *c -= vi * s;
    }
}

/// Core Householder factorization without the rank check. Returns thin
/// factors with `q.cols == r.rows == min(rows, cols)` and a nonnegative
/// R diagonal.
pub(crate) fn householder_qr<T: Real>(a: &DenseMatrix<T>) -> QrFactors<T> {
    let (n, m) = (a.rows(), a.cols());
    let k = n.min(m);
    let mut work = a.clone();
    // Reflectors stored per step; signs fix the nonnegative-diagonal
    // convention after the fact.
    let mut vs: Vec<Vec<T>> = Vec::with_capacity(k);
    let mut betas: Vec<T> = Vec::with_capacity(k);
    let mut signs: Vec<T> = Vec::with_capacity(k);

    for step in 0..k {
        let (v, beta, alpha) = householder(&work.col(step)[step..]);
        for j in step..m {
            apply_householder(&mut work.col_mut(j)[step..], &v, beta);
        }
        // Force the exact value on the diagonal; below-diagonal entries are
        // structural zeros from here on.
        let col = work.col_mut(step);
        col[step] = alpha;
        for r in col[step + 1..].iter_mut() {
            *r = T::zero();
        }
        let sign = if alpha < T::zero() { -T::one() } else { T::one() };
        if sign < T::zero() {
            // Flip row `step` of R (and later the matching Q column).
            for j in step..m {
                let c = work.col_mut(j);
                c[step] = -c[step];
            }
        }
        vs.push(v);
        betas.push(beta);
        signs.push(sign);
    }

    let mut r = DenseMatrix::zeros(k, m);
    for j in 0..m {
        for i in 0..k.min(j + 1) {
            r[(i, j)] = work[(i, j)];
        }
    }

    // Q = H_0 ... H_{k-1} * [I; 0] * diag(signs), built by applying the
    // reflectors in reverse to the identity columns.
    let mut q = DenseMatrix::zeros(n, k);
    for j in 0..k {
        q[(j, j)] = T::one();
        for step in (0..=j.min(k - 1)).rev() {
            apply_householder(&mut q.col_mut(j)[step..], &vs[step], betas[step]);
        }
        if signs[j] < T::zero() {
            for v in q.col_mut(j) {
                *v = -*v;
            }
        }
    }

    QrFactors { q, r }
}

/// Thin QR of a tall matrix (`rows >= cols`) with nonnegative R diagonal.
///
/// Fails with [`Error::RankDeficient`] naming the first offending 0-based
/// column when an R diagonal entry falls to or below `1e-14 * ||a||_F`.
pub fn thin_qr<T: Real>(a: &DenseMatrix<T>) -> Result<QrFactors<T>> {
    if a.rows() < a.cols() {
        return Err(Error::InvalidArgument(format!(
            "thin_qr needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let f = householder_qr(a);
    let tol = T::c(RANK_TOL) * a.norm_fro();
    for i in 0..f.r.rows() {
        if f.r[(i, i)].abs() <= tol {
            return Err(Error::RankDeficient(i));
        }
    }
    Ok(f)
}

/// Column-pivoted Householder QR.
///
/// Columns are processed greatest-remaining-norm first, ties broken by the
/// lowest column index; remaining norms are recomputed from scratch each
/// step so the pivot order is exactly reproducible. Rank deficiency is not
/// an error here: it shows up as zero trailing R rows for the caller to
/// inspect. Returns the factors and the pivot order `perm` such that
/// `a[:, perm] = q * r`.
pub fn pivoted_qr<T: Real>(a: &DenseMatrix<T>) -> (QrFactors<T>, Vec<usize>) {
    let (n, m) = (a.rows(), a.cols());
    let k = n.min(m);
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut vs: Vec<Vec<T>> = Vec::with_capacity(k);
    let mut betas: Vec<T> = Vec::with_capacity(k);
    let mut signs: Vec<T> = Vec::with_capacity(k);

    for step in 0..k {
        // Fresh subcolumn norms; strict `>` keeps the lowest index on ties.
        let mut best = step;
        let mut best_norm = crate::scalar::norm2(&work.col(step)[step..]);
        for j in step + 1..m {
            let nj = crate::scalar::norm2(&work.col(j)[step..]);
            if nj > best_norm {
                best = j;
                best_norm = nj;
            }
        }
        work.swap_cols(step, best);
        perm.swap(step, best);

        let (v, beta, alpha) = householder(&work.col(step)[step..]);
        for j in step..m {
            apply_householder(&mut work.col_mut(j)[step..], &v, beta);
        }
        let col = work.col_mut(step);
        col[step] = alpha;
        for r in col[step + 1..].iter_mut() {
            *r = T::zero();
        }
        let sign = if alpha < T::zero() { -T::one() } else { T::one() };
        if sign < T::zero() {
            for j in step..m {
                let c = work.col_mut(j);
                c[step] = -c[step];
            }
        }
        vs.push(v);
        betas.push(beta);
        signs.push(sign);
    }

    let mut r = DenseMatrix::zeros(k, m);
    for j in 0..m {
        for i in 0..k.min(j + 1) {
            r[(i, j)] = work[(i, j)];
        }
    }
    let mut q = DenseMatrix::zeros(n, k);
    for j in 0..k {
        q[(j, j)] = T::one();
        for step in (0..=j.min(k - 1)).rev() {
            apply_householder(&mut q.col_mut(j)[step..], &vs[step], betas[step]);
        }
        if signs[j] < T::zero() {
            for v in q.col_mut(j) {
                *v = -*v;
            }
        }
    }

    (QrFactors { q, r }, perm)
}

/// Solves `r x = b` for upper triangular `r` by back substitution; `b` may
/// have several columns. Fails with [`Error::SingularTriangular`] at the
/// first exactly zero diagonal (0-based row index).
pub fn back_substitute<T: Real>(r: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let m = r.rows();
    if r.cols() != m {
        return Err(Error::InvalidArgument("back_substitute needs a square R".into()));
    }
    if b.rows() != m {
        return Err(Error::DimensionMismatch { expected: m, got: b.rows() });
    }
    for i in 0..m {
        if r[(i, i)] == T::zero() {
            return Err(Error::SingularTriangular(i));
        }
    }
    let mut x = b.clone();
    for j in 0..b.cols() {
        let xj = x.col_mut(j);
        for i in (0..m).rev() {
            let mut s = xj[i];
            for k in i + 1..m {
                s -= r[(i, k)] * xj[k];
            }
            xj[i] = s / r[(i, i)];
        }
    }
    Ok(x)
}

/// Solves `x r = b` for upper triangular `r` (right division `b r^{-1}`),
/// again refusing exactly zero diagonals.
pub fn back_substitute_right<T: Real>(
    r: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    let m = r.rows();
    if r.cols() != m {
        return Err(Error::InvalidArgument("back_substitute_right needs a square R".into()));
    }
    if b.cols() != m {
        return Err(Error::DimensionMismatch { expected: m, got: b.cols() });
    }
    for i in 0..m {
        if r[(i, i)] == T::zero() {
            return Err(Error::SingularTriangular(i));
        }
    }
    let mut x = b.clone();
    let n = b.rows();
    for j in 0..m {
        // x[:, j] = (b[:, j] - sum_{k<j} x[:, k] r[k, j]) / r[j, j]
        for i in 0..n {
            let mut s = x[(i, j)];
            for k in 0..j {
                s -= x[(i, k)] * r[(k, j)];
            }
            x[(i, j)] = s / r[(j, j)];
        }
    }
    Ok(x)
}

/// Solves the square system `a x = b` via QR; used where a general dense
/// solve is needed without exposing a separate LU kernel.
pub fn solve_square<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidArgument("solve_square needs a square matrix".into()));
    }
    let f = thin_qr(a)?;
    back_substitute(&f.r, &f.q.matmul_at_b(b))
}
