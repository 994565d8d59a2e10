//! Floating point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the optimizers and models are generic over.
///
/// Implemented for `f32` and `f64`. Random draws are always produced in
/// `f64` and narrowed with [`Scalar::lit`], so a given seed yields the
/// same stream of decisions regardless of the scalar type.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(v: f64) -> Self;

    /// Widens to `f64`, used for statistics and persisted output.
    fn to_f64_lossy(self) -> f64;

    fn from_usize_lossy(v: usize) -> Self {
        Self::lit(v as f64)
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Euclidean distance between two equal-length slices.
pub fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|&x| x * x).sum::<T>().sqrt()
}
