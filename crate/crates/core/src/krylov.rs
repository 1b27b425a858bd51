//! k-truncated Arnoldi. Builds a non-orthogonal Krylov basis V_m together
//! with the stored product M_m = A V_m; each new vector is orthogonalized
//! only against the k previous ones, so cost stays linear in m while the
//! basis condition number is allowed to grow.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{dot, norm2, Real};
use crate::sparse::SparseMatrix;

/// Relative threshold below which a new direction counts as an exact
/// invariant-subspace hit.
pub const BREAKDOWN_TOL: f64 = 1e-14;

/// Krylov basis with columns of unit norm, orthogonal to the `k` previous
/// columns, plus the matching columns of `A v`.
#[derive(Debug, Clone)]
pub struct KrylovBasis<T> {
    /// Basis vectors, one column per step.
    pub v: DenseMatrix<T>,
    /// `A` applied to each basis column.
    pub m_prod: DenseMatrix<T>,
    /// Truncation window length used during the build.
    pub k: usize,
    /// Step (1-based) at which the recurrence found an invariant subspace,
    /// if it stopped early. The basis then has `breakdown - 1` columns.
    pub breakdown: Option<usize>,
}

impl<T: Real> KrylovBasis<T> {
    /// Number of basis vectors actually built.
    pub fn m(&self) -> usize {
        self.v.cols()
    }
}

/// Runs the k-truncated Arnoldi recurrence with one reorthogonalization
/// pass inside the window.
pub fn truncated_arnoldi<T: Real>(
    a: &SparseMatrix<T>,
    b: &[T],
    m: usize,
    k: usize,
) -> Result<KrylovBasis<T>> {
    truncated_arnoldi_with(a, b, m, k, true)
}

/// As [`truncated_arnoldi`], but `reorthogonalize = false` runs the single
/// classical Gram-Schmidt projection per step and nothing else.
pub fn truncated_arnoldi_with<T: Real>(
    a: &SparseMatrix<T>,
    b: &[T],
    m: usize,
    k: usize,
    reorthogonalize: bool,
) -> Result<KrylovBasis<T>> {
    let n = a.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if k < 1 {
        return Err(Error::InvalidArgument("truncation length k must be at least 1".into()));
    }
    if m < 1 || m > n {
        return Err(Error::InvalidArgument(format!(
            "basis dimension m = {m} must satisfy 1 <= m <= n = {n}"
        )));
    }
    let nb = norm2(b);
    if nb == T::zero() || !nb.is_finite() {
        return Err(Error::InvalidArgument("starting vector must be nonzero and finite".into()));
    }

    let mut v = DenseMatrix::zeros(n, m);
    let mut m_prod = DenseMatrix::zeros(n, m);
    let v1: Vec<T> = b.iter().map(|&x| x / nb).collect();
    v.set_col(0, &v1);
    m_prod.set_col(0, &a.spmv(&v1)?);

    let passes = if reorthogonalize { 2 } else { 1 };
    let mut breakdown = None;
    let mut built = m;
    for j in 1..m {
        let mut w: Vec<T> = m_prod.col(j - 1).to_vec();
        let norm_prev = norm2(&w);
        let window = j.saturating_sub(k)..j;
        for _ in 0..passes {
            // Classical Gram-Schmidt: coefficients from the vector as it
            // stood at the start of the pass.
            let coeffs: Vec<T> = window.clone().map(|i| dot(v.col(i), &w)).collect();
            for (i, &h) in window.clone().zip(coeffs.iter()) {
                let vi = v.col(i);
                for (we, &ve) in w.iter_mut().zip(vi) {
                    *we -= h * ve;
                }
            }
        }
        let nw = norm2(&w);
        if nw <= T::c(BREAKDOWN_TOL) * norm_prev {
            breakdown = Some(j + 1);
            built = j;
            break;
        }
        for we in w.iter_mut() {
            *we /= nw;
        }
        v.set_col(j, &w);
        m_prod.set_col(j, &a.spmv(&w)?);
    }
    v.truncate_cols(built);
    m_prod.truncate_cols(built);
    Ok(KrylovBasis { v, m_prod, k, breakdown })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::{singular_values, thin_qr};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_to_sparse(a: &DenseMatrix<f64>) -> SparseMatrix<f64> {
        let mut trips = Vec::new();
        for j in 0..a.cols() {
            for i in 0..a.rows() {
                trips.push((i, j, a[(i, j)]));
            }
        }
        SparseMatrix::from_coo(a.rows(), &trips).unwrap()
    }

    fn seeded_square(n: usize, seed: u64) -> SparseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DenseMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        dense_to_sparse(&d)
    }

    fn tridiag_laplacian(d: usize) -> SparseMatrix<f64> {
        let mut trips = Vec::new();
        for i in 0..d {
            trips.push((i, i, -2.0));
            if i > 0 {
                trips.push((i, i - 1, 1.0));
            }
            if i + 1 < d {
                trips.push((i, i + 1, 1.0));
            }
        }
        SparseMatrix::from_coo(d, &trips).unwrap()
    }

    /// Independent full-Arnoldi oracle via modified Gram-Schmidt.
    fn full_arnoldi_mgs(a: &SparseMatrix<f64>, b: &[f64], m: usize) -> DenseMatrix<f64> {
        let n = b.len();
        let mut q = DenseMatrix::zeros(n, m);
        let nb = norm2(b);
        q.set_col(0, &b.iter().map(|&x| x / nb).collect::<Vec<_>>());
        for j in 1..m {
            let mut w = a.spmv(q.col(j - 1)).unwrap();
            for i in 0..j {
                let h = dot(q.col(i), &w);
                for (we, &qe) in w.iter_mut().zip(q.col(i)) {
                    *we -= h * qe;
                }
            }
            let nw = norm2(&w);
            assert!(nw > 1e-12, "oracle hit breakdown");
            q.set_col(j, &w.iter().map(|&x| x / nw).collect::<Vec<_>>());
        }
        q
    }

    #[test]
    fn identity_matrix_breaks_down_at_step_two() {
        let a = SparseMatrix::<f64>::identity(5);
        let b = vec![3.0, 0.0, 4.0, 0.0, 0.0];
        let kb = truncated_arnoldi(&a, &b, 4, 2).unwrap();
        assert_eq!(kb.breakdown, Some(2));
        assert_eq!(kb.m(), 1);
        assert!((kb.v[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((kb.v[(2, 0)] - 0.8).abs() < 1e-15);
        // m_prod = A v = v here.
        assert!((kb.m_prod[(0, 0)] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn full_window_reproduces_orthonormal_arnoldi() {
        let a = seeded_square(30, 11);
        let b: Vec<f64> = (0..30).map(|i| ((i + 1) as f64).sin()).collect();
        let m = 12;
        let kb = truncated_arnoldi(&a, &b, m, m).unwrap();
        assert!(kb.breakdown.is_none());
        let g = kb.v.matmul_at_b(&kb.v);
        for i in 0..m {
            for j in 0..m {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - want).abs() < 1e-10, "gram ({i},{j}) = {}", g[(i, j)]);
            }
        }
    }

    #[test]
    fn truncated_span_matches_full_arnoldi_span() {
        let a = tridiag_laplacian(16);
        let mut b = vec![0.0f64; 16];
        b[0] = 1.0;
        let kb = truncated_arnoldi(&a, &b, 10, 2).unwrap();
        assert_eq!(kb.m(), 10);
        let q2 = full_arnoldi_mgs(&a, &b, 10);
        let q1 = thin_qr(&kb.v).unwrap().q;
        // Residual of projecting q1 onto range(q2); its Frobenius norm is
        // the root sum of squared principal-angle sines.
        let c = q2.matmul_at_b(&q1);
        let mut resid = q1.clone();
        resid.add_assign_scaled(&q2.matmul(&c), -1.0);
        assert!(resid.norm_fro() < 1e-8, "span mismatch, sin residual {}", resid.norm_fro());
    }

    #[test]
    fn columns_are_unit_and_window_orthogonal() {
        for seed in 0..20u64 {
            let n = 25;
            let a = seeded_square(n, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let (m, k) = (12, 3);
            let kb = truncated_arnoldi(&a, &b, m, k).unwrap();
            for j in 0..kb.m() {
                assert!((norm2(kb.v.col(j)) - 1.0).abs() < 1e-13);
                for i in j.saturating_sub(k)..j {
                    let ip = dot(kb.v.col(i), kb.v.col(j)).abs();
                    assert!(ip <= 1e-10, "window inner product {ip} at ({i},{j}) seed {seed}");
                }
                // Stored product matches a fresh spmv.
                let fresh = a.spmv(kb.v.col(j)).unwrap();
                let diff: f64 = fresh
                    .iter()
                    .zip(kb.m_prod.col(j))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                assert!(diff <= 1e-13 * norm2(&fresh).max(1.0));
            }
        }
    }

    #[test]
    fn basis_spans_monomial_krylov_space() {
        let mut evaluated = 0;
        for seed in 0..20u64 {
            let n = 24;
            let m = 6;
            let a = seeded_square(n, 1000 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            // Normalized power sequence spans the same monomial space.
            let mut kmat = DenseMatrix::zeros(n, m);
            let mut x: Vec<f64> = b.clone();
            for j in 0..m {
                let nx = norm2(&x);
                x.iter_mut().for_each(|e| *e /= nx);
                kmat.set_col(j, &x);
                x = a.spmv(&x).unwrap();
            }
            let sk = singular_values(&kmat).unwrap();
            if sk[m - 1] / sk[0] <= 1e-8 {
                continue; // monomial basis itself too ill-conditioned to test
            }
            evaluated += 1;
            let kb = truncated_arnoldi(&a, &b, m, 2).unwrap();
            assert_eq!(kb.m(), m);
            let mut cat = DenseMatrix::zeros(n, 2 * m);
            for j in 0..m {
                cat.set_col(j, kb.v.col(j));
                cat.set_col(m + j, kmat.col(j));
            }
            let s = singular_values(&cat).unwrap();
            assert!(
                s[m] <= 1e-8 * s[0],
                "concatenation rank exceeds m: sigma_{{m+1}} = {} seed {seed}",
                s[m]
            );
        }
        assert!(evaluated >= 10, "too few well-conditioned instances: {evaluated}");
    }

    #[test]
    fn strict_variant_skips_reorthogonalization() {
        let a = seeded_square(40, 3);
        let b: Vec<f64> = (0..40).map(|i| 1.0 / (i + 1) as f64).collect();
        let loose = truncated_arnoldi_with(&a, &b, 20, 4, false).unwrap();
        let tight = truncated_arnoldi(&a, &b, 20, 4).unwrap();
        // Same spans to working accuracy, but not bitwise-equal columns.
        assert_eq!(loose.m(), tight.m());
        let mut worst_loose = 0.0f64;
        let mut worst_tight = 0.0f64;
        for j in 0..20usize {
            for i in j.saturating_sub(4)..j {
                worst_loose = worst_loose.max(dot(loose.v.col(i), loose.v.col(j)).abs());
                worst_tight = worst_tight.max(dot(tight.v.col(i), tight.v.col(j)).abs());
            }
        }
        assert!(worst_tight <= worst_loose + 1e-15);
        assert!(worst_tight <= 1e-13);
    }

    #[test]
    fn rejects_bad_arguments() {
        let a = SparseMatrix::<f64>::identity(4);
        let b = vec![1.0; 4];
        assert!(truncated_arnoldi(&a, &b, 2, 0).is_err());
        assert!(truncated_arnoldi(&a, &b, 5, 2).is_err());
        assert!(truncated_arnoldi(&a, &vec![0.0; 4], 2, 2).is_err());
        assert!(truncated_arnoldi(&a, &vec![1.0; 3], 2, 2).is_err());
    }
}
