//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point type the learner, criteria and engine are generic over.
///
/// Implemented for `f32` and `f64`. The associated tolerances control the
/// Newton solver's stopping rule and are looser for `f32`, whose machine
/// epsilon makes a `1e-6` gradient target unreachable on realistic data.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Default ∞-norm tolerance on the penalized-objective gradient.
    const GRADIENT_TOLERANCE: f64;
    /// Default ∞-norm bound on the final Newton step.
    const STEP_TOLERANCE: f64;

    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    const GRADIENT_TOLERANCE: f64 = 1e-6;
    const STEP_TOLERANCE: f64 = 1e-3;
}

impl Scalar for f32 {
    const GRADIENT_TOLERANCE: f64 = 1e-3;
    const STEP_TOLERANCE: f64 = 1e-2;
}

/// ∞-norm of a vector.
pub fn max_abs<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}
