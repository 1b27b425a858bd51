//! Smallest eigenvalue of a diagonal plus rank-one update, via the secular
//! equation. This is the inner scoring kernel of the greedy oversampling
//! loop, so it avoids forming the dense update.

use crate::scalar::Real;

/// Smallest eigenvalue of `diag(d) + g g^T`.
///
/// `d` must be nonnegative and sorted nonincreasing. The root is bracketed
/// in `[d_min, d_min + ||g||^2]` (Weyl) and polished with a safeguarded
/// Newton iteration to about 1e-12 relative accuracy.
pub fn secular_smallest_eig<T: Real>(d: &[T], g: &[T]) -> T {
    assert_eq!(d.len(), g.len(), "secular_smallest_eig needs matching lengths");
    let m = d.len();
    assert!(m > 0, "secular_smallest_eig needs at least one entry");
    for i in 0..m {
        assert!(d[i] >= T::zero(), "diagonal must be nonnegative");
        if i > 0 {
            assert!(d[i - 1] >= d[i], "diagonal must be sorted nonincreasing");
        }
    }

    let d_min = d[m - 1];
    let gg = crate::scalar::dot(g, g);
    if gg == T::zero() {
        return d_min;
    }

    // Coalesce (numerically) equal poles and drop zero weights. A zero
    // weight leaves its d as an exact eigenvalue; so does every extra copy
    // of a repeated d (the update only moves one vector out of that
    // eigenspace), hence merged copies are recorded as deflated too.
    let scale = d[0].max(gg).max(T::one());
    let merge_tol = scale * T::epsilon() * T::c(4.0);
    let mut poles: Vec<(T, T)> = Vec::with_capacity(m);
    let mut deflated_min: Option<T> = None;
    let deflate = |v: T, cur: &mut Option<T>| {
        *cur = Some(match *cur {
            Some(old) if old <= v => old,
            _ => v,
        });
    };
    for i in 0..m {
        let w = g[i] * g[i];
        if w == T::zero() {
            deflate(d[i], &mut deflated_min);
            continue;
        }
        match poles.last_mut() {
            Some((dp, wp)) if (*dp - d[i]).abs() <= merge_tol => {
                *wp += w;
                deflate(d[i], &mut deflated_min);
            }
            _ => poles.push((d[i], w)),
        }
    }

    if poles.is_empty() {
        return deflated_min.unwrap_or(d_min);
    }

    // Smallest secular root lies strictly between the smallest active pole
    // and the next pole up, and below the Weyl bound for the active part.
    let p_last = poles.len() - 1;
    let lo = poles[p_last].0;
    let wsum = poles.iter().fold(T::zero(), |acc, &(_, w)| acc + w);
    let hi_pole = if p_last > 0 { poles[p_last - 1].0 } else { T::infinity() };
    let hi = (lo + wsum).min(hi_pole);

    // f(lam) = 1 + sum w_i / (d_i - lam); f -> -inf at lo+, f > 0 below the
    // next pole, so the root is bracketed. Bisection with Newton steps when
    // they stay inside the bracket.
    let eval = |lam: T| -> (T, T) {
        let mut f = T::one();
        let mut df = T::zero();
        for &(di, wi) in &poles {
            let diff = di - lam;
            f += wi / diff;
            df += wi / (diff * diff);
        }
        (f, df)
    };

    let mut a = lo;
    let mut b = hi;
    // Nudge off the pole; f(a_eps) should be negative.
    let mut lam = a + (b - a) * T::c(0.5);
    let tol = T::c(1e-12);
    for _ in 0..200 {
        let (f, df) = eval(lam);
        if f == T::zero() {
            break;
        }
        if f < T::zero() {
            a = lam;
        } else {
            b = lam;
        }
        // Newton step on f (df > 0 away from poles; f is increasing).
        let mut next = lam - f / df;
        if !(next > a && next < b) || !next.is_finite() {
            next = a + (b - a) * T::c(0.5);
        }
        let delta = (next - lam).abs();
        lam = next;
        if delta <= tol * lam.abs_floor(tol) || (b - a) <= tol * b.abs_floor(tol) {
            break;
        }
    }

    match deflated_min {
        Some(v) if v < lam => v,
        _ => lam,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;
    use crate::la::eig::dense_eig;

    #[test]
    fn zero_update_returns_d_min() {
        assert_eq!(secular_smallest_eig(&[4.0f64, 1.0], &[0.0, 0.0]), 1.0);
    }

    #[test]
    fn rank_one_on_zero_diagonal() {
        // diag(0,0) + gg^T has eigenvalues {0, ||g||^2}.
        let lam = secular_smallest_eig(&[0.0f64, 0.0], &[3.0, 4.0]);
        assert!(lam.abs() < 1e-12);
    }

    #[test]
    fn matches_dense_eigensolver() {
        // diag(4,1) + [1,1][1,1]^T = [[5,1],[1,2]]
        let lam = secular_smallest_eig(&[4.0f64, 1.0], &[1.0, 1.0]);
        let a = DenseMatrix::from_rows(&[&[5.0f64, 1.0], &[1.0, 2.0]]);
        let eig = dense_eig(&a).unwrap();
        let lam_ref = eig.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
        assert!((lam - lam_ref).abs() <= 1e-12 * lam_ref.abs().max(1.0));
    }

    #[test]
    fn weyl_lower_bound_holds_on_seeded_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let m = rng.gen_range(1..8);
            let mut d: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * 5.0).collect();
            d.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let g: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let lam = secular_smallest_eig(&d, &g);
            let gg: f64 = g.iter().map(|v| v * v).sum();
            assert!(lam >= d[m - 1] - 1e-10);
            assert!(lam <= d[m - 1] + gg + 1e-10);
        }
    }

    #[test]
    fn duplicate_poles_are_coalesced() {
        // diag(2,2) + gg^T with g = (1,1): eigenvalues {2, 4}.
        let lam = secular_smallest_eig(&[2.0f64, 2.0], &[1.0, 1.0]);
        assert!((lam - 2.0).abs() < 1e-10);
    }
}
