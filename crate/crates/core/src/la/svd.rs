//! Thin SVD via one-sided Jacobi rotations on the columns.
//!
//! Jacobi is slow compared to bidiagonalization but simple, unconditionally
//! convergent in practice and accurate for the small factors it is used on
//! (sketched bases, triangular R factors). Tall inputs that only need
//! singular values should go through [`singular_values`], which runs an
//! unchecked QR first and applies Jacobi to the small R factor.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::la::qr::householder_qr;
use crate::scalar::Real;

/// Thin SVD factors: `a = u * diag(sigma) * w^T` with `sigma` nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdFactors<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<T>,
    pub w: DenseMatrix<T>,
}

/// Sweep cap for the Jacobi iteration.
const MAX_SWEEPS: usize = 60;

/// One-sided Jacobi on the columns of `work`, accumulating the right
/// rotations into `w`. Returns Err(NoConvergence) if the off-diagonal mass
/// does not die within the sweep cap.
fn jacobi_columns<T: Real>(work: &mut DenseMatrix<T>, w: &mut DenseMatrix<T>) -> Result<()> {
    let m = work.cols();
    let n = work.rows();
    if m < 2 {
        return Ok(());
    }
    let tol = T::epsilon() * T::c(8.0);
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m - 1 {
            for q in p + 1..m {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                {
                    let cp = work.col(p);
                    let cq = work.col(q);
                    for i in 0..n {
                        alpha += cp[i] * cp[i];
                        beta += cq[i] * cq[i];
                        gamma += cp[i] * cq[i];
                    }
                }
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (beta - alpha) / (T::c(2.0) * gamma);
                let t = {
                    let s = if tau >= T::zero() { T::one() } else { -T::one() };
                    s / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                // Column rotation [c, s; -s, c] zeroing the (p, q) Gram entry.
                for i in 0..n {
                    let vp = work[(i, p)];
                    let vq = work[(i, q)];
                    work[(i, p)] = c * vp - s * vq;
                    work[(i, q)] = s * vp + c * vq;
                }
                for i in 0..m {
                    let vp = w[(i, p)];
                    let vq = w[(i, q)];
                    w[(i, p)] = c * vp - s * vq;
                    w[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence)
}

/// Thin SVD of a tall matrix (`rows >= cols`).
///
/// Zero singular values get their `u` columns filled with an orthonormal
/// completion so `u` always has orthonormal columns.
pub fn thin_svd<T: Real>(a: &DenseMatrix<T>) -> Result<SvdFactors<T>> {
    let (n, m) = (a.rows(), a.cols());
    if n < m {
        return Err(Error::InvalidArgument(format!(
            "thin_svd needs rows >= cols, got {n}x{m}"
        )));
    }
    let mut work = a.clone();
    let mut w = DenseMatrix::identity(m);
    jacobi_columns(&mut work, &mut w)?;

    // Column norms are the singular values; sort nonincreasing.
    let mut order: Vec<usize> = (0..m).collect();
    let norms: Vec<T> = (0..m).map(|j| crate::scalar::norm2(work.col(j))).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let mut sigma = Vec::with_capacity(m);
    let mut u = DenseMatrix::zeros(n, m);
    let mut wsorted = DenseMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        sigma.push(norms[src]);
        wsorted.set_col(dst, w.col(src));
        if norms[src] > T::zero() {
            let scale = T::one() / norms[src];
            let col = work.col(src);
            let dstc = u.col_mut(dst);
            for i in 0..n {
                dstc[i] = col[i] * scale;
            }
        }
    }

    // Orthonormal completion for zero singular values: orthogonalize unit
    // coordinate vectors against the columns already in place.
    for j in 0..m {
        if sigma[j] > T::zero() {
            continue;
        }
        let mut filled = false;
        for e in 0..n {
            let mut cand = vec![T::zero(); n];
            cand[e] = T::one();
            for k in 0..m {
                if k == j || (sigma[k] == T::zero() && k > j) {
                    continue;
                }
                let proj = crate::scalar::dot(u.col(k), &cand);
                let uk = u.col(k).to_vec();
                for i in 0..n {
                    cand[i] -= proj * uk[i];
                }
            }
            let nrm = crate::scalar::norm2(&cand);
            if nrm > T::c(0.5) {
                let inv = T::one() / nrm;
                let dstc = u.col_mut(j);
                for i in 0..n {
                    dstc[i] = cand[i] * inv;
                }
                filled = true;
                break;
            }
        }
        if !filled {
            return Err(Error::NoConvergence);
        }
    }

    Ok(SvdFactors { u, sigma, w: wsorted })
}

/// Singular values only, nonincreasing. Works for any shape and tolerates
/// rank deficiency; tall inputs are compressed by an unchecked QR first so
/// the Jacobi part runs on a square factor.
pub fn singular_values<T: Real>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let (n, m) = (a.rows(), a.cols());
    let square = if n > m {
        householder_qr(a).r
    } else if n < m {
        householder_qr(&a.transpose()).r
    } else {
        a.clone()
    };
    let mut work = square;
    let k = work.cols();
    let mut w = DenseMatrix::identity(k);
    jacobi_columns(&mut work, &mut w)?;
    let mut sigma: Vec<T> = (0..k).map(|j| crate::scalar::norm2(work.col(j))).collect();
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::eig::dense_eig;
    use crate::la::test_util::seeded_matrix;

    #[test]
    fn diagonal_matrix_recovers_diagonal() {
        let mut a = DenseMatrix::zeros(4, 2);
        a[(0, 0)] = 3.0f64;
        a[(1, 1)] = 1.0;
        let f = thin_svd(&a).unwrap();
        assert!((f.sigma[0] - 3.0).abs() < 1e-14);
        assert!((f.sigma[1] - 1.0).abs() < 1e-14);
        reconstructs(&a, &f, 1e-14);
    }

    #[test]
    fn rank_one_all_ones() {
        let a = DenseMatrix::from_fn(3, 2, |_, _| 1.0f64);
        let f = thin_svd(&a).unwrap();
        assert!((f.sigma[0] - 6.0f64.sqrt()).abs() < 1e-14);
        assert!(f.sigma[1].abs() < 1e-14);
        // u stays orthonormal thanks to the completion.
        let qtq = f.u.matmul_at_b(&f.u);
        assert!(qtq.sub(&DenseMatrix::identity(2)).norm_fro() < 1e-12);
    }

    #[test]
    fn cross_checks_against_gram_eigenvalues() {
        let a = seeded_matrix(8, 4, 11);
        let f = thin_svd(&a).unwrap();
        let gram = a.matmul_at_b(&a);
        let eig = dense_eig(&gram).unwrap();
        // Gram eigenvalues are real; sorted descending magnitude means
        // descending value here since they are nonnegative.
        for i in 0..4 {
            let lam = eig.values[i].re.max(0.0);
            assert!(
                (f.sigma[i] - lam.sqrt()).abs() <= 1e-10 * f.sigma[0],
                "sigma {} vs sqrt(eig) {}",
                f.sigma[i],
                lam.sqrt()
            );
        }
        reconstructs(&a, &f, 1e-12);
    }

    #[test]
    fn singular_values_match_thin_svd() {
        let a = seeded_matrix(10, 4, 5);
        let f = thin_svd(&a).unwrap();
        let s = singular_values(&a).unwrap();
        for i in 0..4 {
            assert!((s[i] - f.sigma[i]).abs() <= 1e-12 * f.sigma[0]);
        }
        // Wide input goes through the transpose path.
        let st = singular_values(&a.transpose()).unwrap();
        for i in 0..4 {
            assert!((st[i] - f.sigma[i]).abs() <= 1e-12 * f.sigma[0]);
        }
    }

    fn reconstructs(a: &DenseMatrix<f64>, f: &SvdFactors<f64>, tol: f64) {
        let m = f.sigma.len();
        let mut us = f.u.clone();
        for j in 0..m {
            let s = f.sigma[j];
            for v in us.col_mut(j) {
                *v *= s;
            }
        }
        let rec = us.matmul(&f.w.transpose());
        assert!(rec.sub(a).norm_fro() <= tol * (1.0 + a.norm_fro()));
    }
}
