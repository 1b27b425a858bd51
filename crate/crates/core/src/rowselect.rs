//! Deterministic row selection for the sketch S = I(p, :): DEIM and Q-DEIM
//! pick exactly m rows from an n x m basis, and `oversample` grows a
//! selection to s > m rows with the MPE or GappyPOD+E greedy rule. All
//! argmax ties resolve to the lowest row index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::la::{pivoted_qr, secular_smallest_eig, thin_svd};
use crate::scalar::{dot, Real};

/// Ordered list of distinct row indices defining the sketch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSelector {
    p: Vec<usize>,
}

impl RowSelector {
    /// Validates distinctness and range against the row count `n`.
    pub fn new(p: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in &p {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if seen[i] {
                return Err(Error::InvalidArgument(format!("row index {i} repeats")));
            }
            seen[i] = true;
        }
        Ok(RowSelector { p })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.p
    }
}

/// Oversampling greedy rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OversampleRule {
    /// Exact greedy on the smallest eigenvalue of the rank-one updated
    /// Gram matrix, solved through the secular equation.
    Mpe,
    /// Largest alignment with the right singular vector of sigma_min.
    Gpode,
}

/// DEIM: interpolatory greedy, one row per basis column.
pub fn deim<T: Real>(v: &DenseMatrix<T>) -> Result<RowSelector> {
    let (n, m) = (v.rows(), v.cols());
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("deim needs 1 <= m <= n, got {m} of {n}")));
    }
    let mut p = vec![argmax_abs(v.col(0))];
    for j in 1..m {
        // Solve (S V_j) c = S v_j, then pick the largest interpolation
        // residual entry of v_j - V_j c.
        let sv = gather(v, &p, j);
        let rhs: Vec<T> = p.iter().map(|&r| v[(r, j)]).collect();
        let c = solve_small(&sv, &rhs).map_err(|_| Error::SingularInterpolation(j))?;
        let mut resid: Vec<T> = v.col(j).to_vec();
        for (i, &ci) in c.iter().enumerate() {
            let vi = v.col(i);
            for (re, &ve) in resid.iter_mut().zip(vi) {
                *re -= ci * ve;
            }
        }
        // The residual vanishes at already selected rows in exact
        // arithmetic; skipping them keeps roundoff there from winning the
        // argmax once the genuine residual is tiny.
        let mut pick = None;
        let mut best = T::zero();
        for (i, r) in resid.iter().enumerate() {
            if r.abs() > best && !p.contains(&i) {
                best = r.abs();
                pick = Some(i);
            }
        }
        // Zero residual: column j lies in the span of its predecessors, so
        // the next interpolation system is singular.
        let scale = v.col(j).iter().fold(T::zero(), |acc, &e| acc.max(e.abs()));
        let pick = match pick {
            Some(i) if resid[i].abs() > T::c(1e-14) * scale => i,
            _ => return Err(Error::SingularInterpolation(j + 1)),
        };
        p.push(pick);
    }
    RowSelector::new(p, n)
}

/// Q-DEIM: the first m pivots of a pivoted QR of v transposed.
pub fn qdeim<T: Real>(v: &DenseMatrix<T>) -> Result<RowSelector> {
    let (n, m) = (v.rows(), v.cols());
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("qdeim needs 1 <= m <= n, got {m} of {n}")));
    }
    let (_, perm) = pivoted_qr(&v.transpose());
    RowSelector::new(perm[..m].to_vec(), n)
}

/// Grows `p0` to `s` rows, one greedy pick per step. The smallest singular
/// value of the sketched basis never decreases along the way.
pub fn oversample<T: Real>(
    v: &DenseMatrix<T>,
    p0: &RowSelector,
    s: usize,
    rule: OversampleRule,
) -> Result<RowSelector> {
    let (n, m) = (v.rows(), v.cols());
    if s > n {
        return Err(Error::Exhausted { requested: s, available: n });
    }
    if p0.len() < m || p0.len() > s {
        return Err(Error::InvalidArgument(format!(
            "oversample needs m <= |p0| <= s, got |p0| = {} with m = {m}, s = {s}",
            p0.len()
        )));
    }
    let mut p = p0.indices().to_vec();
    let mut selected = vec![false; n];
    for &i in &p {
        selected[i] = true;
    }
    while p.len() < s {
        let sv = v.select_rows(&p);
        let fac = thin_svd(&sv)?;
        let d: Vec<T> = fac.sigma.iter().map(|&x| x * x).collect();
        let w_min: Vec<T> = fac.w.col(m - 1).to_vec();
        let mut best: Option<(usize, T)> = None;
        for r in 0..n {
            if selected[r] {
                continue;
            }
            let row = v.row(r);
            let score = match rule {
                OversampleRule::Mpe => {
                    let g = fac.w.matvec_t(&row);
                    secular_smallest_eig(&d, &g)
                }
                OversampleRule::Gpode => dot(&row, &w_min).abs(),
            };
            // Strict improvement keeps the lowest index on ties.
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((r, score));
            }
        }
        let (pick, _) = best.expect("s <= n leaves at least one candidate");
        selected[pick] = true;
        p.push(pick);
    }
    RowSelector::new(p, n)
}

/// Uniform random distinct rows; diagnostic baseline only.
pub fn random_rows(n: usize, s: usize, seed: u64) -> Result<RowSelector> {
    if s > n {
        return Err(Error::Exhausted { requested: s, available: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..s {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(s);
    RowSelector::new(pool, n)
}

fn argmax_abs<T: Real>(x: &[T]) -> usize {
    let mut best = 0;
    let mut best_val = x[0].abs();
    for (i, &e) in x.iter().enumerate().skip(1) {
        if e.abs() > best_val {
            best = i;
            best_val = e.abs();
        }
    }
    best
}

/// Rows `p` of the first `cols` columns of `v`.
fn gather<T: Real>(v: &DenseMatrix<T>, p: &[usize], cols: usize) -> DenseMatrix<T> {
    DenseMatrix::from_fn(p.len(), cols, |i, j| v[(p[i], j)])
}

fn solve_small<T: Real>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if a.rows() == 1 {
        if a[(0, 0)].abs() <= T::c(1e-14) {
            return Err(Error::SingularTriangular(0));
        }
        return Ok(vec![b[0] / a[(0, 0)]]);
    }
    let rhs = DenseMatrix::from_fn(b.len(), 1, |i, _| b[i]);
    let x = crate::la::solve_square(a, &rhs)?;
    Ok(x.col(0).to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::{dense_eig, singular_values};

    fn seeded(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
    }

    fn sigma_min_selected(v: &DenseMatrix<f64>, p: &RowSelector) -> f64 {
        let s = singular_values(&v.select_rows(p.indices())).unwrap();
        *s.last().unwrap()
    }

    /// Straight-line DEIM oracle: Gaussian elimination with partial
    /// pivoting instead of QR, no shared helpers.
    fn deim_oracle(v: &DenseMatrix<f64>) -> Vec<usize> {
        let m = v.cols();
        let pick = |x: &[f64]| {
            let mut b = 0;
            for i in 1..x.len() {
                if x[i].abs() > x[b].abs() {
                    b = i;
                }
            }
            b
        };
        let mut p = vec![pick(v.col(0))];
        for j in 1..m {
            let mut aug: Vec<Vec<f64>> = (0..j)
                .map(|r| {
                    let mut row: Vec<f64> = (0..j).map(|c| v[(p[r], c)]).collect();
                    row.push(v[(p[r], j)]);
                    row
                })
                .collect();
            for col in 0..j {
                let piv = (col..j).max_by(|&a, &b| {
                    aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap()
                }).unwrap();
                aug.swap(col, piv);
                for r in col + 1..j {
                    let f = aug[r][col] / aug[col][col];
                    for c in col..=j {
                        aug[r][c] -= f * aug[col][c];
                    }
                }
            }
            let mut c = vec![0.0; j];
            for r in (0..j).rev() {
                let mut acc = aug[r][j];
                for cc in r + 1..j {
                    acc -= aug[r][cc] * c[cc];
                }
                c[r] = acc / aug[r][r];
            }
            let resid: Vec<f64> = (0..v.rows())
                .map(|i| v[(i, j)] - (0..j).map(|cc| v[(i, cc)] * c[cc]).sum::<f64>())
                .collect();
            p.push(pick(&resid));
        }
        p
    }

    #[test]
    fn deim_on_coordinate_basis_picks_in_column_order() {
        let v = DenseMatrix::<f64>::identity(3);
        assert_eq!(deim(&v).unwrap().indices(), &[0, 1, 2]);
    }

    #[test]
    fn deim_hand_example() {
        let v = DenseMatrix::from_rows(&[&[1.0f64, 0.0], &[0.0, 1.0], &[0.5, 0.5]]);
        assert_eq!(deim(&v).unwrap().indices(), &[0, 1]);
    }

    #[test]
    fn deim_matches_straight_line_oracle() {
        for seed in [2u64, 7, 21, 33] {
            let v = seeded(20, 5, seed);
            let got = deim(&v).unwrap();
            assert_eq!(got.indices(), deim_oracle(&v).as_slice(), "seed {seed}");
            assert!(sigma_min_selected(&v, &got) > 0.0);
        }
    }

    #[test]
    fn deim_flags_rank_deficient_basis() {
        // Two identical columns: the step-2 interpolation system degenerates.
        let v = DenseMatrix::from_rows(&[&[1.0f64, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        match deim(&v) {
            Err(Error::SingularInterpolation(j)) => assert_eq!(j, 2),
            other => panic!("expected SingularInterpolation, got {other:?}"),
        }
    }

    #[test]
    fn qdeim_on_coordinate_basis_picks_in_column_order() {
        let v = DenseMatrix::<f64>::identity(3);
        assert_eq!(qdeim(&v).unwrap().indices(), &[0, 1, 2]);
    }

    #[test]
    fn qdeim_hand_example() {
        let v = DenseMatrix::from_rows(&[&[1.0f64, 0.0], &[0.0, 1.0], &[0.5, 0.5]]);
        let mut p = qdeim(&v).unwrap().indices().to_vec();
        p.sort_unstable();
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn qdeim_selection_is_nonsingular() {
        for seed in [4u64, 9, 15] {
            let v = seeded(30, 6, seed);
            let p = qdeim(&v).unwrap();
            assert_eq!(p.len(), 6);
            assert!(sigma_min_selected(&v, &p) > 1e-8);
        }
    }

    #[test]
    fn oversample_is_noop_at_target_size() {
        let v = seeded(15, 4, 1);
        let p0 = deim(&v).unwrap();
        let p = oversample(&v, &p0, p0.len(), OversampleRule::Mpe).unwrap();
        assert_eq!(p, p0);
    }

    #[test]
    fn oversample_forced_choice_takes_last_row() {
        let r = 0.5f64.sqrt();
        let v = DenseMatrix::from_rows(&[&[1.0f64, 0.0], &[0.0, 1.0], &[r, r]]);
        let p0 = RowSelector::new(vec![0, 1], 3).unwrap();
        for rule in [OversampleRule::Mpe, OversampleRule::Gpode] {
            let p = oversample(&v, &p0, 3, rule).unwrap();
            assert_eq!(p.indices(), &[0, 1, 2]);
        }
    }

    #[test]
    fn mpe_matches_exhaustive_rank_one_oracle() {
        let v = seeded(40, 5, 6);
        let mut cur = deim(&v).unwrap();
        while cur.len() < 8 {
            let next = oversample(&v, &cur, cur.len() + 1, OversampleRule::Mpe).unwrap();
            let picked = *next.indices().last().unwrap();
            // Exhaustive: smallest Gram eigenvalue after appending each
            // candidate row, computed by the dense eigensolver.
            let mut best = (usize::MAX, f64::NEG_INFINITY);
            for r in 0..v.rows() {
                if cur.indices().contains(&r) {
                    continue;
                }
                let mut rows = cur.indices().to_vec();
                rows.push(r);
                let sv = v.select_rows(&rows);
                let gram = sv.matmul_at_b(&sv);
                let e = dense_eig(&gram).unwrap();
                let lam_min =
                    e.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
                if lam_min > best.1 + 1e-12 {
                    best = (r, lam_min);
                }
            }
            assert_eq!(picked, best.0, "greedy pick diverged at size {}", cur.len());
            cur = next;
        }
    }

    #[test]
    fn sigma_min_never_decreases_under_oversampling() {
        for (seed, rule) in
            [(3u64, OversampleRule::Mpe), (4, OversampleRule::Gpode), (5, OversampleRule::Mpe)]
        {
            let v = seeded(30, 4, seed);
            let mut cur = deim(&v).unwrap();
            let mut last = sigma_min_selected(&v, &cur);
            while cur.len() < 12 {
                cur = oversample(&v, &cur, cur.len() + 1, rule).unwrap();
                let now = sigma_min_selected(&v, &cur);
                assert!(now >= last - 1e-12, "sigma_min fell {last} -> {now}");
                last = now;
            }
        }
    }

    #[test]
    fn oversample_errors_when_target_exceeds_rows() {
        let v = seeded(10, 3, 0);
        let p0 = deim(&v).unwrap();
        match oversample(&v, &p0, 11, OversampleRule::Gpode) {
            Err(Error::Exhausted { requested, available }) => {
                assert_eq!((requested, available), (11, 10));
            }
            other => panic!("expected Exhausted, got {other:?}"),
        }
    }

    #[test]
    fn selector_validation_rejects_bad_input() {
        assert!(RowSelector::new(vec![0, 2, 2], 5).is_err());
        assert!(RowSelector::new(vec![0, 5], 5).is_err());
        assert!(RowSelector::new(vec![4, 0, 2], 5).is_ok());
    }

    #[test]
    fn random_rows_are_distinct_and_seeded() {
        let a = random_rows(50, 12, 7).unwrap();
        let b = random_rows(50, 12, 7).unwrap();
        assert_eq!(a, b);
        let mut sorted = a.indices().to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 12);
    }
}
