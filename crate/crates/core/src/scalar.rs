//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the solvers are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest tolerance worth asking of an iterative method in this precision.
    fn tol_floor() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for [`Scalar::lit`].
#[inline]
pub(crate) fn c<T: Scalar>(x: f64) -> T {
    T::lit(x)
}

/// `x0 = 2 arccosh(sqrt(3/2))`: phase shift of the homoclinic orbit that passes
/// through `(1, -1/sqrt(3))`.
pub fn homoclinic_shift<T: Scalar>() -> T {
    let r = (c::<T>(1.5)).sqrt();
    c::<T>(2.0) * (r + (r * r - T::one()).sqrt()).ln()
}
