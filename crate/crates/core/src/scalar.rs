//! Floating-point scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// A real scalar the bound, marginal and diagonal code is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Iteration tolerance that never drops below a few ulps of the type.
    fn tolerance(requested: f64) -> Self {
        lit::<Self>(requested).max(Self::epsilon() * lit(8.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
