//! Scalar abstraction for all floating-point computation.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar used by estimators, generators and bound
/// evaluators. Implemented for `f32` and `f64`; all library code is written
/// against this trait and instantiated at `f64` by the experiment harness.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`. Random draws are made in `f64` and
    /// converted through this, so the `f64` and `f32` instantiations of a
    /// generator consume identical random streams.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 converts to Real")
    }

    /// Exact for any count a dataset can hold.
    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize converts to Real")
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip_f64() {
        let x = 0.12345678901234567_f64;
        assert_eq!(f64::of(x), x);
        assert_eq!(x.as_f64(), x);
        assert_eq!(f64::of_usize(1 << 40), (1u64 << 40) as f64);
    }

    #[test]
    fn f32_narrowing_is_nearest() {
        let x = f32::of(0.1);
        assert!((x - 0.1f32).abs() < f32::EPSILON);
    }
}
