use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the engine is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Two knot abscissae closer than this are merged.
    fn knot_tol() -> Self {
        lit::<Self>(1e-14).max(Self::epsilon() * lit(4.0))
    }

    /// Tolerance used when comparing event times.
    fn time_tol() -> Self {
        lit::<Self>(1e-12).max(Self::epsilon() * lit(64.0))
    }

    fn half() -> Self {
        lit(0.5)
    }

    fn two() -> Self {
        lit(2.0)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: FromPrimitive>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}
