//! Nonsymmetric dense eigensolver: Householder reduction to upper
//! Hessenberg form, Francis double-shift QR for the eigenvalues, then
//! inverse iteration on the Hessenberg form for the eigenvectors.
//!
//! The Francis loop follows the classic EISPACK/JAMA `hqr2` control flow
//! (deflation scan, Wilkinson exceptional shifts, bulge chase) restricted
//! to eigenvalues only; update ranges are clipped to the active block since
//! no Schur vectors are accumulated.

use num_complex::Complex;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::la::qr::{apply_householder, householder};
use crate::scalar::Real;

/// Eigenpairs of a real square matrix. `values[i]` pairs with the `i`-th
/// column of `vectors`; values are sorted by descending magnitude, ties by
/// descending real part, then descending imaginary part. Each vector has
/// unit 2-norm and its largest-modulus entry rotated to the positive real
/// axis, which pins the otherwise free complex phase.
#[derive(Debug, Clone)]
pub struct EigenPairs<T> {
    pub values: Vec<Complex<T>>,
    /// Column-major `dim x dim` complex matrix of eigenvectors.
    pub vectors: Vec<Complex<T>>,
    pub dim: usize,
}

impl<T: Real> EigenPairs<T> {
    pub fn vector(&self, i: usize) -> &[Complex<T>] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }
}

/// Hard cap on the input dimension; the dense workspaces are O(n^2).
const MAX_DIM: usize = 2000;

/// Total double-shift steps allowed, per unit of dimension.
const STEP_CAP_PER_DIM: usize = 50;

/// Reduces `a` to upper Hessenberg form `h` with an accumulated orthogonal
/// `p` such that `a = p h p^T`.
fn hessenberg<T: Real>(a: &DenseMatrix<T>) -> (DenseMatrix<T>, DenseMatrix<T>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut p = DenseMatrix::identity(n);
    if n < 3 {
        return (h, p);
    }
    for k in 0..n - 2 {
        let (v, beta, alpha) = householder(&h.col(k)[k + 1..]);
        if beta == T::zero() {
            continue;
        }
        // Left application to rows k+1.. of columns k..n.
        for j in k..n {
            apply_householder(&mut h.col_mut(j)[k + 1..], &v, beta);
        }
        // The reflected column is alpha * e1 exactly.
        let col = h.col_mut(k);
        col[k + 1] = alpha;
        for z in col[k + 2..].iter_mut() {
            *z = T::zero();
        }
        // Right application to columns k+1.. over all rows: rows of h and p
        // are combined along the reflector.
        right_apply(&mut h, k + 1, &v, beta, n);
        right_apply(&mut p, k + 1, &v, beta, n);
    }
    (h, p)
}

/// Applies `(I - beta v v^T)` from the right to columns `[c0, c0+v.len())`
/// over the first `rows` rows.
fn right_apply<T: Real>(m: &mut DenseMatrix<T>, c0: usize, v: &[T], beta: T, rows: usize) {
    for i in 0..rows {
        let mut s = T::zero();
        for (t, &vt) in v.iter().enumerate() {
            s += m[(i, c0 + t)] * vt;
        }
        s *= beta;
        for (t, &vt) in v.iter().enumerate() {
            m[(i, c0 + t)] -= s * vt;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
fn francis_eigenvalues<T: Real>(mut h: DenseMatrix<T>) -> Result<Vec<Complex<T>>> {
    let nn = h.rows();
    let mut values = vec![Complex::new(T::zero(), T::zero()); nn];
    if nn == 0 {
        return Ok(values);
    }
    let eps = T::epsilon();
    // Fallback scale for the deflation test when local entries vanish.
    let mut hnorm = T::zero();
    for j in 0..nn {
        for i in 0..(j + 2).min(nn) {
            hnorm += h[(i, j)].abs();
        }
    }
    if hnorm == T::zero() {
        return Ok(values);
    }

    let step_cap = STEP_CAP_PER_DIM * nn;
    let mut steps = 0usize;
    let mut exshift = T::zero();
    let mut iter = 0usize;
    let mut hi = nn - 1;

    'outer: loop {
        // Deflation scan: find the top of the unreduced block ending at hi.
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].abs() + h[(lo, lo)].abs();
            if s == T::zero() {
                s = hnorm;
            }
            if h[(lo, lo - 1)].abs() < eps * s {
                h[(lo, lo - 1)] = T::zero();
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            values[hi] = Complex::new(h[(hi, hi)] + exshift, T::zero());
            if hi == 0 {
                break 'outer;
            }
            hi -= 1;
            iter = 0;
            continue;
        }
        if lo == hi - 1 {
            let w = h[(hi, hi - 1)] * h[(hi - 1, hi)];
            let p = (h[(hi - 1, hi - 1)] - h[(hi, hi)]) / T::c(2.0);
            let q = p * p + w;
            let z = q.abs().sqrt();
            let x = h[(hi, hi)] + exshift;
            if q >= T::zero() {
                let z = if p >= T::zero() { p + z } else { p - z };
                values[hi - 1] = Complex::new(x + z, T::zero());
                values[hi] = if z != T::zero() {
                    Complex::new(x - w / z, T::zero())
                } else {
                    values[hi - 1]
                };
            } else {
                values[hi - 1] = Complex::new(x + p, z);
                values[hi] = Complex::new(x + p, -z);
            }
            if hi == 1 {
                break 'outer;
            }
            hi -= 2;
            iter = 0;
            continue;
        }

        // One double-shift sweep on the block [lo, hi].
        steps += 1;
        if steps > step_cap {
            return Err(Error::NoConvergence);
        }
        iter += 1;

        let mut x = h[(hi, hi)];
        let mut y = h[(hi - 1, hi - 1)];
        let mut w = h[(hi, hi - 1)] * h[(hi - 1, hi)];
        if iter == 10 || iter == 20 {
            // Wilkinson's ad hoc exceptional shift.
            exshift += x;
            for i in 0..=hi {
                h[(i, i)] -= x;
            }
            let s = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
            x = T::c(0.75) * s;
            y = x;
            w = T::c(-0.4375) * s * s;
        } else if iter == 30 {
            // MATLAB-style ad hoc shift.
            let mut s = (y - x) / T::c(2.0);
            s = s * s + w;
            if s > T::zero() {
                let mut sq = s.sqrt();
                if y < x {
                    sq = -sq;
                }
                let shift = x - w / ((y - x) / T::c(2.0) + sq);
                for i in 0..=hi {
                    h[(i, i)] -= shift;
                }
                exshift += shift;
                x = T::c(0.964);
                y = x;
                w = x;
            }
        }

        // Look for two consecutive small subdiagonals to start the bulge.
        let mut m = hi - 2;
        let (mut p, mut q, mut r);
        loop {
            let z = h[(m, m)];
            let rr = x - z;
            let ss = y - z;
            p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
            q = h[(m + 1, m + 1)] - z - rr - ss;
            r = h[(m + 2, m + 1)];
            let scale = p.abs() + q.abs() + r.abs();
            p /= scale;
            q /= scale;
            r /= scale;
            if m == lo {
                break;
            }
            let lhs = h[(m, m - 1)].abs() * (q.abs() + r.abs());
            let rhs = eps
                * p.abs()
                * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
            if lhs < rhs {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=hi {
            h[(i, i - 2)] = T::zero();
            if i > m + 2 {
                h[(i, i - 3)] = T::zero();
            }
        }

        // Bulge chase.
        for k in m..hi {
            let notlast = k != hi - 1;
            if k != m {
                p = h[(k, k - 1)];
                q = h[(k + 1, k - 1)];
                r = if notlast { h[(k + 2, k - 1)] } else { T::zero() };
                x = p.abs() + q.abs() + r.abs();
                if x == T::zero() {
                    continue;
                }
                p /= x;
                q /= x;
                r /= x;
            }
            let mut s = (p * p + q * q + r * r).sqrt();
            if p < T::zero() {
                s = -s;
            }
            if s == T::zero() {
                continue;
            }
            if k != m {
                h[(k, k - 1)] = -s * x;
            } else if lo != m {
                h[(k, k - 1)] = -h[(k, k - 1)];
            }
            p += s;
            x = p / s;
            y = q / s;
            let z = r / s;
            q /= p;
            r /= p;

            // Row modification over the active block columns.
            for j in k..=hi {
                let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                if notlast {
                    pp += r * h[(k + 2, j)];
                    h[(k + 2, j)] -= pp * z;
                }
                h[(k, j)] -= pp * x;
                h[(k + 1, j)] -= pp * y;
            }
            // Column modification over the active block rows.
            let top = lo;
            for i in top..=hi.min(k + 3) {
                let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                if notlast {
                    pp += z * h[(i, k + 2)];
                    h[(i, k + 2)] -= pp * r;
                }
                h[(i, k)] -= pp;
                h[(i, k + 1)] -= pp * q;
            }
        }
    }

    Ok(values)
}

/// Solves `(h - lambda I) x = b` in place for upper Hessenberg `h` using
/// Gaussian elimination with row pivoting between adjacent rows; exact zero
/// pivots are replaced by `eps * scale` so the solve always completes
/// (standard inverse-iteration practice).
fn solve_hessenberg_shifted<T: Real>(
    h: &DenseMatrix<T>,
    lambda: Complex<T>,
    b: &mut [Complex<T>],
    scale: T,
) {
    let n = h.rows();
    let zero = Complex::new(T::zero(), T::zero());
    let tiny = Complex::new(T::epsilon() * scale.max(T::min_positive_value()), T::zero());
    // Dense complex copy of the shifted Hessenberg matrix, column-major.
    let mut u = vec![zero; n * n];
    for j in 0..n {
        for i in 0..(j + 2).min(n) {
            u[j * n + i] = Complex::new(h[(i, j)], T::zero());
        }
        u[j * n + j] -= lambda;
    }
    for k in 0..n.saturating_sub(1) {
        if u[k * n + k + 1].norm_sqr() > u[k * n + k].norm_sqr() {
            for j in k..n {
                u.swap(j * n + k, j * n + k + 1);
            }
            b.swap(k, k + 1);
        }
        let mut piv = u[k * n + k];
        if piv == zero {
            piv = tiny;
            u[k * n + k] = piv;
        }
        let factor = u[k * n + k + 1] / piv;
        if factor != zero {
            for j in k + 1..n {
                let above = u[j * n + k];
                u[j * n + k + 1] = u[j * n + k + 1] - factor * above;
            }
            b[k + 1] = b[k + 1] - factor * b[k];
        }
        u[k * n + k + 1] = zero;
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= u[j * n + i] * b[j];
        }
        let mut piv = u[i * n + i];
        if piv == zero {
            piv = tiny;
        }
        b[i] = s / piv;
    }
}

fn cnorm<T: Real>(x: &[Complex<T>]) -> T {
    let mut acc = T::zero();
    for v in x {
        acc += v.norm_sqr();
    }
    acc.sqrt()
}

/// Eigenvalues and eigenvectors of a real square matrix (dimension capped
/// at 2000). Vectors come from inverse iteration on the Hessenberg form and
/// are mapped back through the reduction transform.
pub fn dense_eig<T: Real>(a: &DenseMatrix<T>) -> Result<EigenPairs<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::InvalidArgument("dense_eig needs a square matrix".into()));
    }
    if n > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "dense_eig dimension {n} exceeds the cap {MAX_DIM}"
        )));
    }
    if n == 0 {
        return Ok(EigenPairs { values: vec![], vectors: vec![], dim: 0 });
    }

    let (h, p) = hessenberg(a);
    let mut values = francis_eigenvalues(h.clone())?;

    // Deterministic order: descending |lambda|, then Re, then Im.
    values.sort_by(|x, y| {
        let (mx, my) = (x.norm_sqr(), y.norm_sqr());
        my.partial_cmp(&mx)
            .unwrap()
            .then(y.re.partial_cmp(&x.re).unwrap())
            .then(y.im.partial_cmp(&x.im).unwrap())
    });

    let hscale = h.norm_fro();
    let mut vectors = vec![Complex::new(T::zero(), T::zero()); n * n];
    let start_norm = T::one() / T::from_usize(n).unwrap().sqrt();
    for (idx, &lam) in values.iter().enumerate() {
        let mut x: Vec<Complex<T>> = vec![Complex::new(start_norm, T::zero()); n];
        let mut residual = T::infinity();
        for _it in 0..5 {
            solve_hessenberg_shifted(&h, lam, &mut x, hscale);
            let nrm = cnorm(&x);
            if !nrm.is_finite() || nrm == T::zero() {
                // Restart from a coordinate direction if the solve blew up.
                x = vec![Complex::new(T::zero(), T::zero()); n];
                x[idx % n] = Complex::new(T::one(), T::zero());
                continue;
            }
            let inv = T::one() / nrm;
            for v in &mut x {
                *v = Complex::new(v.re * inv, v.im * inv);
            }
            // Residual ||H x - lambda x||.
            let mut res = T::zero();
            for i in 0..n {
                let mut s = -lam * x[i];
                for j in if i == 0 { 0 } else { i - 1 }..n {
                    s += x[j] * h[(i, j)];
                }
                res += s.norm_sqr();
            }
            residual = res.sqrt();
            if residual <= T::c(1e-13) * hscale.max(T::min_positive_value()) {
                break;
            }
        }
        let _ = residual;

        // Back to the original coordinates: v = P x.
        let mut v = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..n {
            let xj = x[j];
            if xj == Complex::new(T::zero(), T::zero()) {
                continue;
            }
            let pc = p.col(j);
            for i in 0..n {
                v[i].re += pc[i] * xj.re;
                v[i].im += pc[i] * xj.im;
            }
        }
        // Unit norm, largest entry on the positive real axis.
        let nrm = cnorm(&v);
        if nrm > T::zero() {
            let inv = T::one() / nrm;
            for z in &mut v {
                *z = Complex::new(z.re * inv, z.im * inv);
            }
        }
        let mut kmax = 0;
        let mut best = T::zero();
        for (k, z) in v.iter().enumerate() {
            let m = z.norm_sqr();
            if m > best {
                best = m;
                kmax = k;
            }
        }
        if best > T::zero() {
            let phase = v[kmax] / Complex::new(best.sqrt(), T::zero());
            let conj = Complex::new(phase.re, -phase.im);
            for z in &mut v {
                *z *= conj;
            }
        }
        vectors[idx * n..(idx + 1) * n].copy_from_slice(&v);
    }

    Ok(EigenPairs { values, vectors, dim: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::test_util::seeded_matrix;

    fn residual(a: &DenseMatrix<f64>, pairs: &EigenPairs<f64>, i: usize) -> f64 {
        let n = pairs.dim;
        let x = pairs.vector(i);
        let lam = pairs.values[i];
        let mut res = 0.0;
        for r in 0..n {
            let mut s = -lam * x[r];
            for c in 0..n {
                s += x[c] * a[(r, c)];
            }
            res += s.norm_sqr();
        }
        res.sqrt()
    }

    #[test]
    fn diagonal_matrix() {
        let mut a = DenseMatrix::zeros(3, 3);
        a[(0, 0)] = 1.0f64;
        a[(1, 1)] = 2.0;
        a[(2, 2)] = 3.0;
        let e = dense_eig(&a).unwrap();
        let got: Vec<f64> = e.values.iter().map(|v| v.re).collect();
        assert_eq!(got, vec![3.0, 2.0, 1.0]);
        for i in 0..3 {
            assert!(e.values[i].im.abs() < 1e-14);
            assert!(residual(&a, &e, i) < 1e-12);
        }
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let a = DenseMatrix::from_rows(&[&[0.0f64, 1.0], &[-1.0, 0.0]]);
        let e = dense_eig(&a).unwrap();
        assert!((e.values[0] - Complex::new(0.0, 1.0)).norm() < 1e-14);
        assert!((e.values[1] - Complex::new(0.0, -1.0)).norm() < 1e-14);
        for i in 0..2 {
            assert!(residual(&a, &e, i) < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_laplacian_spectrum() {
        // tridiag(1, -2, 1) of size 10: eigenvalues 2 cos(k pi / 11) - 2.
        let n = 10;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                -2.0f64
            } else if i.abs_diff(j) == 1 {
                1.0
            } else {
                0.0
            }
        });
        let e = dense_eig(&a).unwrap();
        let mut expect: Vec<f64> =
            (1..=n).map(|k| 2.0 * (k as f64 * std::f64::consts::PI / 11.0).cos() - 2.0).collect();
        // Match the solver order: descending |lambda|.
        expect.sort_by(|x, y| y.abs().partial_cmp(&x.abs()).unwrap());
        for i in 0..n {
            assert!(e.values[i].im.abs() < 1e-12);
            assert!(
                (e.values[i].re - expect[i]).abs() < 1e-10,
                "eigenvalue {i}: {} vs {}",
                e.values[i].re,
                expect[i]
            );
            assert!(residual(&a, &e, i) < 1e-10);
        }
    }

    #[test]
    fn defective_block_still_meets_residual_bound() {
        let a = DenseMatrix::from_rows(&[&[0.0f64, 1.0], &[0.0, 0.0]]);
        let e = dense_eig(&a).unwrap();
        for i in 0..2 {
            assert!(e.values[i].norm() < 1e-12);
            assert!(residual(&a, &e, i) <= 1e-8 * a.norm_fro());
        }
    }

    #[test]
    fn seeded_matrices_meet_residual_bound() {
        for seed in 0..20u64 {
            let n = 3 + (seed as usize % 6);
            let a = seeded_matrix(n, n, seed + 100);
            let e = dense_eig(&a).unwrap();
            let nf = a.norm_fro();
            for i in 0..n {
                let r = residual(&a, &e, i);
                assert!(r <= 1e-8 * nf, "seed {seed} pair {i}: residual {r:.3e}");
            }
            // Eigenvalue sum equals the trace (first-order sanity).
            let tr: f64 = (0..n).map(|i| a[(i, i)]).sum();
            let sum: f64 = e.values.iter().map(|v| v.re).sum();
            assert!((tr - sum).abs() <= 1e-8 * nf.max(1.0));
        }
    }
}
