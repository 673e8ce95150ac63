//! Scalar abstractions shared by the numeric modules.
//!
//! [`Scalar`] is the minimal field-like bound used by the change functions,
//! which are rational in their arguments and therefore run unchanged on
//! exact rationals. [`Real`] adds transcendental functions and is used by
//! everything that needs `sqrt`, `ln` or `exp`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Ordered field element: enough for the gain algebra.
pub trait Scalar: Num + PartialOrd + Clone + Debug + ToPrimitive {}

impl<T: Num + PartialOrd + Clone + Debug + ToPrimitive> Scalar for T {}

/// Floating point: f32 or f64.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
