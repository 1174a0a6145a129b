//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point type the linear algebra is generic over (`f32` or `f64`).
///
/// Tolerances are exposed per type so that the same generic code can be run
/// in single precision without tripping double-precision thresholds.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Singular values or probabilities at or below this are treated as zero.
    fn zero_tol() -> Self;
    /// Slack below which a trade-off inequality counts as saturated.
    fn saturation_tol() -> Self;
    /// Residual accepted for analytically complete measurements.
    fn completeness_tol() -> Self;

    /// Converts an `f64` literal; every `f64` is representable up to rounding.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal fits in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in scalar type")
    }
}

impl Real for f64 {
    fn zero_tol() -> Self {
        1e-12
    }
    fn saturation_tol() -> Self {
        1e-9
    }
    fn completeness_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn zero_tol() -> Self {
        1e-6
    }
    fn saturation_tol() -> Self {
        1e-4
    }
    fn completeness_tol() -> Self {
        1e-5
    }
}

/// Complex scalar over a [`Real`] component type.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}
