use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the model and analysis code is written against.
///
/// Implemented for `f32` and `f64`. The tolerances used throughout the crate
/// are expressed as `f64` literals and converted with [`Scalar::of`], so the
/// tighter ones (1e-12 and below) are only meaningful for `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    /// Lossy conversion to `f64`, used for error payloads and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Relative comparison `|a - b| <= rel * max(|a|, |b|)`.
#[inline]
pub(crate) fn rel_eq<T: Scalar>(a: T, b: T, rel: T) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}
