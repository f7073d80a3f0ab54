//! Scalar abstraction for the geometry and summary-statistic layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Floating point type usable by the generic parts of the crate (f32 or f64).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("finite f64 converts to every supported scalar")
    }

    fn from_count(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("usize converts to every supported scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }

    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Reduce an angle into `[0, 2π)`.
///
/// `rem_euclid` can return exactly `2π` for tiny negative inputs because of
/// rounding, so that case is folded back to zero.
pub fn wrap_angle<T: Scalar>(theta: T) -> T {
    let tau = T::two_pi();
    let mut r = theta % tau;
    if r < T::zero() {
        r = r + tau;
    }
    if r >= tau {
        r = T::zero();
    }
    r
}
