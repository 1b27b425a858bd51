//! Dense matrix exponential by scaling and squaring with the degree-13
//! Padé approximant. The scaling power is chosen so the scaled 1-norm
//! drops below the classical degree-13 threshold.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::la::qr::{back_substitute, thin_qr};
use crate::scalar::Real;

/// 1-norm threshold below which the unscaled degree-13 approximant is
/// accurate to working precision.
const THETA_13: f64 = 5.371920351148152;

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `exp(a)` for square `a`. A large 1-norm only costs extra squarings;
/// [`Error::Overflow`] fires when the exponential itself leaves the
/// floating point range (some entry of the result is not finite).
pub fn expm<T: Real>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::InvalidArgument("expm needs a square matrix".into()));
    }
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(Error::Overflow);
    }

    // Number of halvings to bring the norm under the Padé threshold.
    let mut squarings = 0u32;
    let mut scaled = a.clone();
    if norm > T::c(THETA_13) {
        let ratio = (norm / T::c(THETA_13)).to_f64().unwrap();
        squarings = ratio.log2().ceil() as u32;
        scaled.scale(T::c(0.5).powi(squarings as i32));
    }

    // Padé-13: U = A (b13 A6 + b11 A4 + b9 A2) + A (b7 A6 + b5 A4 + b3 A2 + b1 I)
    //          V = b12 A6^2-ish ... using the standard splitting:
    //   u = A [ A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I ]
    //   v = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let b: Vec<T> = PADE_13.iter().map(|&c| T::c(c)).collect();
    let ident = DenseMatrix::identity(n);
    let a2 = scaled.matmul(&scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut w1 = a6.clone();
    w1.scale(b[13]);
    w1.add_assign_scaled(&a4, b[11]);
    w1.add_assign_scaled(&a2, b[9]);
    let mut w = a6.matmul(&w1);
    w.add_assign_scaled(&a6, b[7]);
    w.add_assign_scaled(&a4, b[5]);
    w.add_assign_scaled(&a2, b[3]);
    w.add_assign_scaled(&ident, b[1]);
    let u = scaled.matmul(&w);

    let mut z1 = a6.clone();
    z1.scale(b[12]);
    z1.add_assign_scaled(&a4, b[10]);
    z1.add_assign_scaled(&a2, b[8]);
    let mut v = a6.matmul(&z1);
    v.add_assign_scaled(&a6, b[6]);
    v.add_assign_scaled(&a4, b[4]);
    v.add_assign_scaled(&a2, b[2]);
    v.add_assign_scaled(&ident, b[0]);

    // (V - U) F = (V + U)
    let mut vm = v.clone();
    vm.add_assign_scaled(&u, -T::one());
    let mut vp = v;
    vp.add_assign_scaled(&u, T::one());
    let f = thin_qr(&vm).map_err(|_| Error::NoConvergence)?;
    let mut result = back_substitute(&f.r, &f.q.matmul_at_b(&vp))?;

    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    if !result.data().iter().all(|e| e.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(result)
}
