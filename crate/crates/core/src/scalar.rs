//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over [`Real`], which is any IEEE
//! floating point type with the conversions the kernels need. Concrete
//! aliases for the `f64` instantiations live at the crate root; the CLI and
//! the quantitative tests all run on `f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar usable by all kernels in this crate.
///
/// Implemented for `f32` and `f64` through the blanket impl. Fixed
/// tolerances quoted in the documentation (rank thresholds, breakdown
/// thresholds) are stated for `f64`; they are stored as `f64` literals and
/// converted, so on `f32` they act as very permissive thresholds.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Display + LowerExp + Debug + Copy + Send + Sync + 'static
{
    /// Shorthand for converting an `f64` constant into `Self`.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// `max(|self|, floor)`, used to build relative tolerances.
    #[inline]
    fn abs_floor(self, floor: Self) -> Self {
        self.abs().max(floor)
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Display
        + LowerExp
        + Debug
        + Copy
        + Send
        + Sync
        + 'static
{
}

/// Euclidean norm of a slice.
pub fn norm2<T: Real>(x: &[T]) -> T {
    // Scaled accumulation so intermediate squares cannot overflow for
    // well-scaled inputs; plain sum is fine at the sizes used here but the
    // guard is cheap.
    let mut max = T::zero();
    for &v in x {
        max = max.max(v.abs());
    }
    if max == T::zero() || !max.is_finite() {
        return max;
    }
    let mut acc = T::zero();
    for &v in x {
        let s = v / max;
        acc += s * s;
    }
    max * acc.sqrt()
}

/// Dot product of two slices of equal length.
pub fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = T::zero();
    for i in 0..x.len() {
        acc += x[i] * y[i];
    }
    acc
}
