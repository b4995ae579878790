//! Scalar abstraction: the numerics are generic over the floating-point type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the crate (f32 or f64).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an f64 constant into the working scalar type.
#[inline]
pub fn real<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("f64 constant must be representable")
}

/// Converts a usize (grid index, count) into the working scalar type.
#[inline]
pub fn real_of_usize<S: Scalar>(n: usize) -> S {
    S::from_usize(n).expect("usize must be representable")
}

/// Converts an i32 (weight exponent, harmonic order) into the working scalar type.
#[inline]
pub fn real_of_i32<S: Scalar>(n: i32) -> S {
    S::from_i32(n).expect("i32 must be representable")
}
