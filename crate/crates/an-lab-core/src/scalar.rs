//! Scalar abstraction: everything analytic in this crate is generic over a
//! floating-point type implementing [`Real`].
//!
//! `f64` is the intended workhorse (and the only type the simulator and CLI
//! use); `f32` is supported for callers that trade accuracy for footprint.
//! The one operation the `num-traits` stack lacks is the complementary error
//! function, which the Q-function needs at full double precision, so [`Real`]
//! adds an `erfc` hook. The `f32` implementation computes through `f64` and
//! casts: a wider intermediate is the only way to keep the documented
//! accuracy of downstream formulas honest near the tails.

use core::fmt::{Debug, Display};
use core::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the analytic layer is generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Complementary error function, `erfc(x) = 1 - erf(x)`.
    fn erfc(self) -> Self;
}

impl Real for f64 {
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    fn erfc(self) -> Self {
        libm::erfc(f64::from(self)) as f32
    }
}

/// Converts an `f64` literal into the working scalar.
///
/// Infallible for the provided impls: every finite `f64` maps into `f32`
/// (with rounding) and trivially into `f64`.
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 converts into any Real scalar")
}

/// Reads a scalar back as `f64` for error messages and reports.
pub(crate) fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
